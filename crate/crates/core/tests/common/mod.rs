#![allow(dead_code)]

use balayage_core::{KernelMatrix, Measure, SupportSet};
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric PD matrix `BᵀB/k + δI` with `δ ∈ [0.05, 1]`.
pub fn random_spd(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    let shift = rng.gen_range(0.05..1.0);
    b.transpose() * &b / k as f64 + DMatrix::identity(k, k) * shift
}

/// Gaussian kernel on random points in the unit cube plus a diagonal shift:
/// nonnegative and strictly positive definite.
pub fn random_kernel(rng: &mut ChaCha8Rng, m: usize) -> KernelMatrix {
    let pts: Vec<[f64; 3]> = (0..m)
        .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect();
    let width = rng.gen_range(0.3..1.0);
    let shift = rng.gen_range(0.02..0.2);
    let k = DMatrix::from_fn(m, m, |i, j| {
        let d2: f64 = (0..3).map(|c| (pts[i][c] - pts[j][c]).powi(2)).sum();
        (-d2 / (width * width)).exp() + if i == j { shift } else { 0.0 }
    });
    KernelMatrix::new(k).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, m: usize, size: usize) -> SupportSet {
    SupportSet::new(sample(rng, m, size).into_vec(), m).unwrap()
}

/// A random test instance: kernel, mixed-sign charge and node set A.
pub struct Case {
    pub kernel: KernelMatrix,
    pub omega: Measure,
    pub set: SupportSet,
}

pub fn random_case(seed: u64, max_m: usize) -> Case {
    let mut r = rng(seed);
    let m = r.gen_range(8..=max_m);
    let kernel = random_kernel(&mut r, m);
    let size = r.gen_range(2..=m - 2);
    let set = random_subset(&mut r, m, size);
    let omega = Measure::new(
        (0..m)
            .map(|i| {
                let scale = if set.contains(i) { 0.3 } else { 1.0 };
                if r.gen_bool(0.6) {
                    scale * r.gen_range(-1.0..2.0)
                } else {
                    0.0
                }
            })
            .collect(),
    );
    Case { kernel, omega, set }
}

/// Independent potential `K·μ` by a double loop.
pub fn naive_potential(k: &KernelMatrix, mu: &Measure) -> Vec<f64> {
    let m = k.size();
    (0..m)
        .map(|i| (0..m).map(|j| k.get(i, j) * mu.weights()[j]).sum())
        .collect()
}

pub fn naive_energy(k: &KernelMatrix, mu: &Measure) -> f64 {
    let u = naive_potential(k, mu);
    u.iter().zip(mu.weights()).map(|(a, b)| a * b).sum()
}
