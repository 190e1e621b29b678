mod common;

use balayage_core::balayage::{mass_bound_check_default, restricted_problem_value, verify_ii1, MassBoundCheck};
use balayage_core::energy::{gauss_functional, potential, strong_distance};
use balayage_core::instances::{fixtures::riesz_fixtures, Instance};
use balayage_core::{pseudo_balayage, KernelMatrix, Measure, SupportSet};
use common::{naive_potential, random_case, rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-10;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn value_bracket_and_functional(seed in 0u64..100_000) {
        let c = random_case(seed, 30);
        let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        let u_abs = naive_potential(&c.kernel, &c.omega.variation());
        let max_a = c.set.indices().iter().map(|&i| u_abs[i]).fold(0.0, f64::max);
        prop_assert!(hat.value <= 1e-9);
        prop_assert!(hat.value >= -2.0 * max_a * hat.mass - 1e-9);
        let direct = gauss_functional(&c.kernel, &c.omega, &hat.measure).unwrap();
        prop_assert!((direct - hat.value).abs() <= 1e-9);
    }

    #[test]
    fn positive_scaling(seed in 0u64..100_000, q in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let c = random_case(seed, 30);
        let a = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        let b = pseudo_balayage(&c.kernel, &c.omega.scaled(q), &c.set, TOL).unwrap();
        prop_assert!(b.measure.max_abs_diff(&a.measure.scaled(q)) <= 1e-8);
    }

    #[test]
    fn certificate_characterizes_the_solution(seed in 0u64..100_000) {
        let c = random_case(seed, 30);
        let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        prop_assert!(verify_ii1(&c.kernel, &c.omega, &c.set, &hat.measure, 1e-8).unwrap().holds);

        // Positive noise on A breaks the certificate.
        let mut r = rng(seed + 7);
        let noise = Measure::embed(
            c.kernel.size(),
            &c.set,
            &(0..c.set.len()).map(|_| r.gen_range(0.1..1.0)).collect::<Vec<_>>(),
        );
        let moved = hat.measure.add(&noise.scaled(1e-2));
        prop_assert!(!verify_ii1(&c.kernel, &c.omega, &c.set, &moved, 1e-8).unwrap().holds);
    }

    #[test]
    fn purely_negative_charge_sweeps_to_zero(seed in 0u64..100_000) {
        let c = random_case(seed, 30);
        let neg = c.omega.negative_part().scaled(-1.0);
        let hat = pseudo_balayage(&c.kernel, &neg, &c.set, TOL).unwrap();
        prop_assert!(hat.measure.is_zero());
        prop_assert_eq!(hat.value, 0.0);
        // The domination inequality is strict wherever the negative charge
        // has positive potential.
        let u = potential(&c.kernel, &neg).unwrap();
        for &i in c.set.indices() {
            prop_assert!(u[i] <= 0.0);
        }
    }
}

#[test]
fn converse_candidates_coincide_with_the_solution() {
    // Among measures on A, only ω̂^A passes the certificate: any candidate
    // that passes with residual ~0 is within 1e−7 of it.
    for seed in 0..40 {
        let c = random_case(seed, 20);
        let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        let mut r = rng(seed + 100);
        for _ in 0..20 {
            let eps = 10f64.powi(-r.gen_range(3..9));
            let noise: Vec<f64> = (0..c.set.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
            let cand = Measure::embed(
                c.kernel.size(),
                &c.set,
                &hat.measure
                    .restricted(&c.set)
                    .iter()
                    .zip(&noise)
                    .map(|(w, n)| (w + eps * n).max(0.0))
                    .collect::<Vec<_>>(),
            );
            let check = verify_ii1(&c.kernel, &c.omega, &c.set, &cand, 1e-12).unwrap();
            if check.holds {
                assert!(strong_distance(&c.kernel, &cand, &hat.measure).unwrap() <= 1e-7);
            }
        }
    }
}

#[test]
fn zero_candidate_fails_when_potential_is_positive() {
    let c = random_case(3, 20);
    let plus = c.omega.positive_part();
    let u = potential(&c.kernel, &plus).unwrap();
    assert!(c.set.indices().iter().any(|&i| u[i] > 0.0));
    let check = verify_ii1(&c.kernel, &plus, &c.set, &Measure::zeros(c.kernel.size()), 1e-9).unwrap();
    assert!(!check.holds);
    assert!(check.atom_test_min < 0.0);
}

#[test]
fn restricted_budget_values() {
    for seed in 0..20 {
        let c = random_case(seed, 25);
        let hat = pseudo_balayage(&c.kernel, &c.omega, &c.set, TOL).unwrap();
        let zero = restricted_problem_value(&c.kernel, &c.omega, &c.set, 0.0, TOL).unwrap();
        assert_eq!(zero, 0.0);
        let full = restricted_problem_value(&c.kernel, &c.omega, &c.set, hat.mass * 1.5 + 1.0, TOL).unwrap();
        assert!((full - hat.value).abs() <= 1e-9);
        if hat.mass > 1e-3 {
            let half = restricted_problem_value(&c.kernel, &c.omega, &c.set, hat.mass / 2.0, TOL).unwrap();
            assert!(half > hat.value + 1e-9, "seed {seed}: {half} vs {}", hat.value);
        }
    }
}

#[test]
fn mass_bound_on_riesz_alpha_one_sphere() {
    let (_, spec) = riesz_fixtures()
        .into_iter()
        .find(|(name, _)| *name == "sphere_alpha1_outside")
        .unwrap();
    let inst = Instance::build(&spec).unwrap();
    let hat = pseudo_balayage(&inst.kernel, &inst.omega, &inst.node_set(), 1e-9).unwrap();
    let check = mass_bound_check_default(&hat, Some(inst.ugaheri_h()), &inst.omega);
    assert_eq!(inst.ugaheri_h(), 1.0);
    assert!(matches!(check, MassBoundCheck::Holds { .. }), "{check:?}");
}

#[test]
fn mass_bound_skipped_without_h() {
    let k = KernelMatrix::new(DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.1, 0.9, 1.0, 0.5, 0.1, 0.5, 1.0])).unwrap();
    let omega = Measure::new(vec![0.0, 0.0, 1.0]);
    let set = SupportSet::new(vec![0, 1], 3).unwrap();
    let hat = pseudo_balayage(&k, &omega, &set, TOL).unwrap();
    assert_eq!(mass_bound_check_default(&hat, None, &omega), MassBoundCheck::SkippedNoH);
}

#[test]
fn newtonian_sphere_sweeps_r_over_d() {
    // Coarse discretization against the continuum value R/d; the refined
    // comparison lives in the acceptance suite.
    for d in [1.5, 2.0, 3.0] {
        let spec = balayage_core::instances::InstanceSpec {
            dimension: 3,
            kernel: balayage_core::instances::KernelSpec::Riesz { alpha: 2.0 },
            geometry: balayage_core::instances::Geometry::Sphere {
                radius: 1.0,
                m: 500,
                center: None,
            },
            regularization: Default::default(),
            charges: vec![balayage_core::instances::ChargeAtom {
                point: vec![0.0, 0.0, d],
                mass: 1.0,
            }],
        };
        let inst = Instance::build(&spec).unwrap();
        let hat = pseudo_balayage(&inst.kernel, &inst.omega, &inst.node_set(), 1e-9).unwrap();
        let rel = (hat.mass - 1.0 / d).abs() * d;
        assert!(rel < 0.03, "d = {d}: mass {}", hat.mass);
    }
}
