//! Empirical lower bound for the maximum-principle constant of a matrix.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::potential;
use crate::error::{Error, Result};
use crate::gauss::capacitary_measure;
use crate::kernel::KernelMatrix;
use crate::measure::{Measure, SupportSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UgaheriWitness {
    /// Node subset whose capacitary measure was tested (empty for a
    /// user-supplied measure).
    pub subset: Vec<usize>,
    /// `max_X U^μ / max_{supp μ} U^μ`.
    pub ratio: f64,
}

/// `ĥ` is a lower bound for any valid constant, never a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UgaheriEstimate {
    pub h_hat: f64,
    /// The largest ratios found, best first (at most five).
    pub witnesses: Vec<UgaheriWitness>,
    pub samples: usize,
    pub seed: u64,
}

fn ratio(kernel: &KernelMatrix, mu: &Measure, support_threshold: f64) -> Result<f64> {
    let u = potential(kernel, mu)?;
    let on_support = mu
        .weights()
        .iter()
        .zip(&u)
        .filter(|(w, _)| **w > support_threshold)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let everywhere = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(everywhere / on_support)
}

/// Samples `trials` random node subsets (trial `t` draws from
/// `ChaCha8Rng::seed_from_u64(seed + t)`), takes their capacitary measures,
/// and records the ratio of the largest potential anywhere to the largest on
/// the support. `extra` measures are tested as given.
pub fn ugaheri_estimate(
    kernel: &KernelMatrix,
    trials: usize,
    seed: u64,
    extra: &[Measure],
    tol: f64,
) -> Result<UgaheriEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let m = kernel.size();
    let threshold = 10.0 * tol;
    let mut found = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let size = rng.gen_range(1..=m);
            let idx = sample(&mut rng, m, size).into_vec();
            let set = SupportSet::new(idx, m)?;
            let cap = capacitary_measure(kernel, &set, tol)?;
            Ok(UgaheriWitness {
                ratio: ratio(kernel, &cap.gamma, threshold)?,
                subset: set.indices().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for mu in extra {
        if !mu.is_positive() || mu.is_zero() {
            return Err(Error::InvalidParameter("tested measures must be positive and nonzero".into()));
        }
        found.push(UgaheriWitness {
            subset: vec![],
            ratio: ratio(kernel, mu, 0.0)?,
        });
    }
    found.sort_by(|a, b| b.ratio.total_cmp(&a.ratio));
    found.truncate(5);
    Ok(UgaheriEstimate {
        h_hat: found[0].ratio.max(1.0),
        witnesses: found,
        samples: trials + extra.len(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_kernel_gives_one() {
        let k = KernelMatrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 3.0]]).unwrap();
        let e = ugaheri_estimate(&k, 20, 1, &[], 1e-10).unwrap();
        assert!((e.h_hat - 1.0).abs() < 1e-9);
        assert_eq!(e.samples, 20);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let k = KernelMatrix::from_rows(&[vec![2.0, 1.5, 0.1], vec![1.5, 2.0, 0.2], vec![0.1, 0.2, 1.0]]).unwrap();
        let a = ugaheri_estimate(&k, 10, 7, &[Measure::atom(3, 0, 1.0)], 1e-10).unwrap();
        let b = ugaheri_estimate(&k, 10, 7, &[Measure::atom(3, 0, 1.0)], 1e-10).unwrap();
        assert_eq!(a, b);
        assert!(a.h_hat >= 1.0);
        assert!(ugaheri_estimate(&k, 0, 7, &[], 1e-10).is_err());
    }
}
