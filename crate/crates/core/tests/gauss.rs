mod common;

use balayage_core::energy::{energy, strong_distance};
use balayage_core::gauss::{extremal_diagnostic, solvability_check, Solvability};
use balayage_core::{capacitary_measure, pseudo_balayage, solve_gauss, Measure, SupportSet};
use common::{naive_potential, random_case, random_subset, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const TOL: f64 = 1e-10;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_dominates_balayage_value(seed in 0u64..100_000) {
        let c = random_case(seed, 30);
        let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        let g = solve_gauss(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        prop_assert!(hat.value <= g.value + 1e-10);
        prop_assert!((g.measure.total_mass() - 1.0).abs() <= 1e-9);
        prop_assert!(g.measure.is_carried_by(&c.set));
    }

    #[test]
    fn equilibrium_identity(seed in 0u64..100_000) {
        let c = random_case(seed, 30);
        let g = solve_gauss(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        // ∫(U^λ − U^ω) dλ against an independent potential.
        let ul = naive_potential(&c.kernel, &g.measure);
        let uo = naive_potential(&c.kernel, &c.omega);
        let integral: f64 = g.measure.weights().iter().zip(ul.iter().zip(&uo)).map(|(w, (a, b))| w * (a - b)).sum();
        prop_assert!((integral - g.equilibrium_constant).abs() <= 1e-9);
        prop_assert!(g.ch1_min >= -1e-9);
    }

    #[test]
    fn capacity_grows_with_the_set(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let m = r.gen_range(6..25);
        let k = common::random_kernel(&mut r, m);
        let size = r.gen_range(2..=m);
        let big = random_subset(&mut r, m, size);
        let keep = r.gen_range(1..big.len());
        let small = SupportSet::new(big.indices()[..keep].to_vec(), m).unwrap();
        let cs = capacitary_measure(&k, &small, TOL).unwrap();
        let cb = capacitary_measure(&k, &big, TOL).unwrap();
        prop_assert!(cs.capacity <= cb.capacity + 1e-9);
        let (lo, _) = cb.equilibrium_potential_range;
        prop_assert!(lo >= 1.0 - 1e-8);
    }
}

#[test]
fn unit_balayage_mass_gives_lambda() {
    for seed in 0..30 {
        let c = random_case(seed, 25);
        let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        if hat.mass < 1e-3 {
            continue;
        }
        let omega = c.omega.scaled(1.0 / hat.mass);
        let hat1 = pseudo_balayage(&c.kernel, &omega, &c.set, TOL).unwrap();
        let g = solve_gauss(&c.kernel, &omega, &c.set, TOL).unwrap();
        assert!(strong_distance(&c.kernel, &g.measure, &hat1.measure).unwrap() <= 1e-7, "seed {seed}");
        assert!(g.measure.max_abs_diff(&hat1.measure) <= 1e-7);
    }
}

#[test]
fn single_node_capacity() {
    let c = random_case(11, 12);
    let i = c.set.indices()[0];
    let one = SupportSet::new(vec![i], c.kernel.size()).unwrap();
    let cap = capacitary_measure(&c.kernel, &one, TOL).unwrap();
    let kii = c.kernel.get(i, i);
    assert!((cap.capacity - 1.0 / kii).abs() <= 1e-12);
    assert!((cap.equilibrium_potential_range.0 - 1.0).abs() <= 1e-12);
}

#[test]
fn capacity_is_inverse_minimal_energy() {
    let c = random_case(5, 20);
    let g = solve_gauss(&c.kernel, &Measure::zeros(c.kernel.size()), &c.set, TOL).unwrap();
    let cap = capacitary_measure(&c.kernel, &c.set, TOL).unwrap();
    let e = energy(&c.kernel, &g.measure).unwrap();
    assert!((cap.capacity - 1.0 / e).abs() <= 1e-9 * cap.capacity);
}

/// Nested prefixes of a shuffled copy of `set`, ending at `set`.
fn chain_within(seed: u64, set: &SupportSet, m: usize, stages: usize) -> Vec<SupportSet> {
    let mut r = rng(seed);
    let mut order = set.indices().to_vec();
    order.shuffle(&mut r);
    let mut out: Vec<SupportSet> = Vec::new();
    for s in 1..=stages {
        let len = (s * order.len() / stages).max(1);
        if out.last().is_none_or(|p| p.len() < len) {
            out.push(SupportSet::new(order[..len].to_vec(), m).unwrap());
        }
    }
    out
}

#[test]
fn single_stage_diagnostic_matches_solve() {
    let c = random_case(21, 20);
    let d = extremal_diagnostic(&c.kernel, &c.omega, std::slice::from_ref(&c.set), TOL).unwrap();
    let g = solve_gauss(&c.kernel, &c.omega, &c.set, TOL).unwrap();
    assert!((d.sequence_values[0] - g.value).abs() <= 1e-10);
    assert!(d.limit_measure.max_abs_diff(&g.measure) <= 1e-8);
}

#[test]
fn three_stage_values_decrease() {
    for seed in 0..20 {
        let c = random_case(seed, 30);
        let ch = chain_within(seed, &SupportSet::full(c.kernel.size()).unwrap(), c.kernel.size(), 3);
        let d = extremal_diagnostic(&c.kernel, &c.omega, &ch, TOL).unwrap();
        for p in d.sequence_values.windows(2) {
            assert!(p[1] <= p[0] + 1e-10, "seed {seed}: {:?}", d.sequence_values);
        }
        assert!(d.limit_mass <= 1.0 + 1e-9);
    }
}

#[test]
fn large_balayage_mass_gives_nonzero_c_xi() {
    let c = random_case(8, 25);
    let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
    assert!(hat.mass > 1e-3);
    let omega = c.omega.scaled(3.0 / hat.mass);
    let ch = chain_within(8, &c.set, c.kernel.size(), 3);
    let d = extremal_diagnostic(&c.kernel, &omega, &ch, TOL).unwrap();
    assert!((d.limit_mass - 1.0).abs() <= 1e-9);
    assert!(d.c_xi.abs() > 1e-3, "C_ξ = {}", d.c_xi);
}

#[test]
fn truncation_regime_verdicts() {
    let c = random_case(4, 25);
    let neg = c.omega.negative_part().scaled(-1.0);
    let v = solvability_check(&c.kernel, &neg, &c.set, 1e-9, false).unwrap();
    assert!(matches!(v, Solvability::Unsolvable(ref d) if d.xi_mass == 0.0));
    assert!(solvability_check(&c.kernel, &neg, &c.set, 1e-9, true).unwrap().is_solvable());
}
