//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p balayage-core --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use balayage_core::balayage::{mass_bound_check, pseudo_balayage, MassBoundCheck};
use balayage_core::energy::{gauss_functional, strong_distance};
use balayage_core::experiments::{
    frostman_study, monotone_down, monotone_up, solvability_scan, sphere_capacity_study, swept_mass_study,
    Checked, RowSignature, ScanOptions,
};
use balayage_core::gauss::solve_gauss;
use balayage_core::instances::fixtures::{newtonian_shell_family, riesz_fixtures};
use balayage_core::instances::Instance;
use balayage_core::qp::{brute_force_cone, brute_force_simplex, solve_cone_qp, solve_simplex_qp};
use balayage_core::{ConeQpProblem, Measure, SimplexQpProblem, SupportSet};
use common::*;
use rand::Rng;

fn verdict(n: u32, name: &str, pass: bool, detail: String, elapsed: Duration, budget: Duration) {
    let in_time = elapsed <= budget;
    println!(
        "criterion {n} [{}] {name}: {detail}; {:.1}s (budget {}s)",
        if pass && in_time { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its runtime budget");
}

fn inf_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let (mut w_err, mut obj_err) = (0.0_f64, 0.0_f64);
    for seed in 0..200u64 {
        let mut r = rng(1000 + seed);
        let k = r.gen_range(1..=10);
        let q = random_spd(&mut r, k);
        let b: Vec<f64> = (0..k).map(|_| r.gen_range(-1.0..1.0)).collect();
        let p = ConeQpProblem::new(q, b).unwrap();
        let sol = solve_cone_qp(&p, 1e-10, 10_000).unwrap();
        let oracle = brute_force_cone(&p).unwrap();
        w_err = w_err.max(inf_norm(&sol.weights, &oracle));
        obj_err = obj_err.max((sol.objective - p.objective(&oracle)).abs());

        let mut r = rng(5000 + seed);
        let k = r.gen_range(1..=10);
        let q = random_spd(&mut r, k);
        let f: Vec<f64> = (0..k).map(|_| r.gen_range(-1.0..1.0)).collect();
        let p = SimplexQpProblem::new(q, f).unwrap();
        let sol = solve_simplex_qp(&p, 1e-10, 10_000).unwrap();
        let oracle = brute_force_simplex(&p).unwrap();
        w_err = w_err.max(inf_norm(&sol.weights, &oracle));
        obj_err = obj_err.max((sol.objective - p.objective(&oracle)).abs());
    }
    verdict(
        1,
        "oracle equivalence (200 cone + 200 simplex)",
        w_err <= 1e-8 && obj_err <= 1e-10,
        format!("max weight error {w_err:.2e} (≤ 1e-8), max objective error {obj_err:.2e} (≤ 1e-10)"),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

/// Residuals of the potential characterization computed from scratch.
struct Residuals {
    def1_min: f64,
    complementarity: f64,
    orthogonality: f64,
}

fn residuals(case: &Case, hat: &Measure) -> Residuals {
    let u_hat = naive_potential(&case.kernel, hat);
    let u_omega = naive_potential(&case.kernel, &case.omega);
    let mut r = Residuals {
        def1_min: f64::INFINITY,
        complementarity: 0.0,
        orthogonality: 0.0,
    };
    for &i in case.set.indices() {
        let d = u_hat[i] - u_omega[i];
        r.def1_min = r.def1_min.min(d);
        r.complementarity = r.complementarity.max((hat.weights()[i] * d).abs());
        r.orthogonality += hat.weights()[i] * d;
    }
    r
}

#[test]
fn criterion_2_characterization_suite() {
    let start = Instant::now();
    let (mut def1, mut comp, mut orth) = (f64::INFINITY, 0.0_f64, 0.0_f64);
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut carried = true;
    for seed in 0..50u64 {
        let case = random_case(seed, 60);
        let hat = pseudo_balayage(&case.kernel, &case.omega, &case.set, 1e-8).unwrap();
        carried &= hat.measure.is_positive() && hat.measure.is_carried_by(&case.set);
        let r = residuals(&case, &hat.measure);
        def1 = def1.min(r.def1_min);
        comp = comp.max(r.complementarity);
        orth = orth.max(r.orthogonality.abs());
        vmin = vmin.min(hat.value);
        vmax = vmax.max(hat.value);
    }
    let pass = carried && def1 >= -1e-8 && comp <= 1e-8 && orth <= 1e-8 && vmin > -1e6 && vmax <= 1e-10;
    verdict(
        2,
        "characterization suite (50 instances, m ≤ 60)",
        pass,
        format!(
            "min def1 residual {def1:.2e}, complementarity {comp:.2e}, |∫U^(ω̂−ω)dω̂| {orth:.2e}, values in [{vmin:.3e}, {vmax:.3e}]"
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_3_degenerate_exactness() {
    let start = Instant::now();
    let (mut zero_err, mut scale_err) = (0.0_f64, 0.0_f64);
    for seed in 0..50u64 {
        let case = random_case(seed, 60);
        let neg = case.omega.negative_part().scaled(-1.0);
        let hat = pseudo_balayage(&case.kernel, &neg, &case.set, 1e-8).unwrap();
        zero_err = zero_err.max(hat.measure.weights().iter().fold(hat.value.abs(), |a, w| a.max(w.abs())));

        let base = pseudo_balayage(&case.kernel, &case.omega, &case.set, 1e-8).unwrap();
        for q in [0.5, 2.0, 10.0] {
            let scaled = pseudo_balayage(&case.kernel, &case.omega.scaled(q), &case.set, 1e-8).unwrap();
            scale_err = scale_err.max(inf_norm(scaled.measure.weights(), base.measure.scaled(q).weights()));
        }
    }
    verdict(
        3,
        "degenerate exactness",
        zero_err <= 1e-12 && scale_err <= 1e-8,
        format!("ω = −ω⁻ max |ω̂|, |ŵ| = {zero_err:.2e} (≤ 1e-12); scaling error {scale_err:.2e} (≤ 1e-8)"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

fn random_chain(seed: u64) -> (Case, Vec<SupportSet>) {
    let mut r = rng(90_000 + seed);
    let mut case = random_case(7_000 + seed, 60);
    let m = case.kernel.size();
    // Five strictly increasing sets ending at A.
    let mut order: Vec<usize> = case.set.indices().to_vec();
    while order.len() < 5 {
        let extra = (0..m).find(|i| !order.contains(i)).unwrap();
        order.push(extra);
    }
    order.sort();
    for i in (1..order.len()).rev() {
        let j = r.gen_range(0..=i);
        order.swap(i, j);
    }
    let n = order.len();
    let cuts: Vec<usize> = (1..=5).map(|s| (n * s).div_ceil(5).max(s)).collect();
    let chain: Vec<SupportSet> = cuts.iter().map(|&c| SupportSet::new(order[..c].to_vec(), m).unwrap()).collect();
    case.set = chain[4].clone();
    (case, chain)
}

#[test]
fn criterion_4_fund_inequality() {
    let start = Instant::now();
    let (mut worst, mut dist) = (f64::NEG_INFINITY, 0.0_f64);
    for seed in 0..20u64 {
        let (case, chain) = random_chain(seed);
        let direct = pseudo_balayage(&case.kernel, &case.omega, &case.set, 1e-8).unwrap();
        let up = monotone_up(&case.kernel, &case.omega, &chain, 1e-8).unwrap();
        for pair in chain.windows(2) {
            // Recompute the inequality independently of the report.
            let a = pseudo_balayage(&case.kernel, &case.omega, &pair[0], 1e-8).unwrap();
            let b = pseudo_balayage(&case.kernel, &case.omega, &pair[1], 1e-8).unwrap();
            let lhs = naive_energy(&case.kernel, &a.measure.sub(&b.measure));
            let rhs = 2.0 * gauss_functional(&case.kernel, &case.omega, &a.measure).unwrap()
                - 2.0 * gauss_functional(&case.kernel, &case.omega, &b.measure).unwrap();
            worst = worst.max(lhs - rhs);
        }
        worst = worst.max(up.fund_slack.iter().map(|s| -s).fold(f64::NEG_INFINITY, f64::max));
        let up_last = pseudo_balayage(&case.kernel, &case.omega, &chain[4], 1e-8).unwrap();
        dist = dist.max(strong_distance(&case.kernel, &up_last.measure, &direct.measure).unwrap());
        dist = dist.max(*up.stage_norms.last().unwrap());

        let mut down_chain = chain.clone();
        down_chain.reverse();
        let down = monotone_down(&case.kernel, &case.omega, &down_chain, 1e-8).unwrap();
        worst = worst.max(down.fund_slack.iter().map(|s| -s).fold(f64::NEG_INFINITY, f64::max));
        let target = pseudo_balayage(&case.kernel, &case.omega, &chain[0], 1e-8).unwrap();
        let down_last = down.stage_values.last().unwrap();
        dist = dist.max((down_last - target.value).abs());
        dist = dist.max(*down.stage_norms.last().unwrap());
        assert!(up.all_passed() && down.all_passed());
    }
    verdict(
        4,
        "fund inequality on 20 nested 5-stage chains (up and down)",
        worst <= 1e-8 && dist <= 1e-8,
        format!("max ‖ω̂^K−ω̂^K′‖² − (2I_f(ω̂^K)−2I_f(ω̂^K′)) = {worst:.2e} (≤ 1e-8); final-stage distance {dist:.2e} (≤ 1e-8)"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_5_gauss_suite() {
    let start = Instant::now();
    let (mut ch1, mut ch2, mut gap, mut order) = (0.0_f64, 0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for seed in 0..50u64 {
        let case = random_case(seed, 60);
        let g = solve_gauss(&case.kernel, &case.omega, &case.set, 1e-8).unwrap();
        let hat = pseudo_balayage(&case.kernel, &case.omega, &case.set, 1e-8).unwrap();
        let u = naive_potential(&case.kernel, &g.measure);
        let uw = naive_potential(&case.kernel, &case.omega);
        let weighted: Vec<f64> = u.iter().zip(&uw).map(|(a, b)| a - b).collect();
        let c: f64 = g.measure.weights().iter().zip(&weighted).map(|(a, b)| a * b).sum();
        for &i in case.set.indices() {
            ch1 = ch1.max(c - weighted[i]);
            if g.measure.weights()[i] > 1e-7 {
                ch2 = ch2.max((weighted[i] - c).abs());
            }
        }
        gap = gap.max((g.multiplier - c).abs());
        order = order.max(hat.value - g.value);
    }
    verdict(
        5,
        "Gauss suite (instances of criterion 2)",
        ch1 <= 1e-8 && ch2 <= 1e-8 && gap <= 1e-9 && order <= 1e-10,
        format!(
            "U_f^λ ≥ c violation {ch1:.2e}, support equality {ch2:.2e} (≤ 1e-8); multiplier vs integral {gap:.2e} (≤ 1e-9); ŵ − w max {order:.2e} (≤ 1e-10)"
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_6_mass_one_identification() {
    let start = Instant::now();
    let (mut worst, mut used, mut seed) = (0.0_f64, 0, 0u64);
    while used < 20 {
        let case = random_case(40_000 + seed, 60);
        seed += 1;
        let hat = pseudo_balayage(&case.kernel, &case.omega, &case.set, 1e-10).unwrap();
        if hat.mass < 1e-3 {
            continue;
        }
        let omega = case.omega.scaled(1.0 / hat.mass);
        let unit = pseudo_balayage(&case.kernel, &omega, &case.set, 1e-10).unwrap();
        let g = solve_gauss(&case.kernel, &omega, &case.set, 1e-10).unwrap();
        let d = strong_distance(&case.kernel, &g.measure, &unit.measure).unwrap();
        worst = worst.max(d).max(inf_norm(g.measure.weights(), unit.measure.weights()));
        used += 1;
    }
    verdict(
        6,
        "mass-one identification (20 instances)",
        worst <= 1e-7,
        format!("max ‖λ − ω̂‖ (energy and sup norms) {worst:.2e} (≤ 1e-7)"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

/// Quadrature oracle for the Newtonian energy of the uniform unit measure on
/// the sphere of radius `r`: `∫∫|x−y|⁻¹ dσ dσ`, integrating over the polar
/// angle between the two points.
fn uniform_sphere_energy(r: f64) -> f64 {
    let n = 200_000;
    let h = std::f64::consts::PI / n as f64;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            0.5 * t.sin() / (2.0 * r * (t / 2.0).sin()) * h
        })
        .sum()
}

/// Mass of the exterior Poisson density `(d²−R²)/(4πR|x−y|³)` on the sphere,
/// integrated over the polar angle.
fn poisson_mass(r: f64, d: f64) -> f64 {
    let n = 200_000;
    let h = std::f64::consts::PI / n as f64;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            let dist = (r * r + d * d - 2.0 * r * d * t.cos()).sqrt();
            (d * d - r * r) / (4.0 * std::f64::consts::PI * r * dist.powi(3)) * 2.0 * std::f64::consts::PI * r * r * t.sin() * h
        })
        .sum()
}

#[test]
fn criterion_7_riesz_desk_scale() {
    let start = Instant::now();
    let ms = [250, 500, 1000, 2000];
    let cap = sphere_capacity_study(2.0, 1.0, &ms, 1e-8).unwrap();
    let swept = swept_mass_study(2.0, 1.0, 2.0, &ms, 1e-8).unwrap();
    let frost = frostman_study(2.0, 1.0, &ms[..3], 1e-8).unwrap();
    let cap_oracle = 1.0 / uniform_sphere_energy(1.0);
    let swept_oracle = poisson_mass(1.0, 2.0);
    println!("  capacity values {:?} → extrapolated {:.5} (order {:?}); quadrature oracle {:.5}", cap.values, cap.limit, cap.observed_order, cap_oracle);
    println!("  swept mass values {:?} → extrapolated {:.5} (order {:?}); quadrature oracle {:.5}", swept.values, swept.limit, swept.observed_order, swept_oracle);
    println!("  Frostman max(U^γ − 1) over {} probes: {:?}", frost.probe_count, frost.max_excess);
    let limits_agree = ((cap.limit - cap_oracle) / cap_oracle).abs() <= 0.02 && ((swept.limit - swept_oracle) / swept_oracle).abs() <= 0.02;
    verdict(
        7,
        "Newtonian sphere R=1, m=2000",
        cap.last_relative_error <= 0.02 && swept.last_relative_error <= 0.02 && frost.decreasing && limits_agree,
        format!(
            "capacity {:.5} vs limit {:.5} ({:.2}%), swept mass {:.5} vs limit {:.5} ({:.2}%), Frostman decreasing = {}",
            cap.values[3],
            cap.limit,
            100.0 * cap.last_relative_error,
            swept.values[3],
            swept.limit,
            100.0 * swept.last_relative_error,
            frost.decreasing
        ),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_8_mass_bound() {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for (name, spec) in riesz_fixtures() {
        let inst = Instance::build(&spec).unwrap();
        let hat = pseudo_balayage(&inst.kernel, &inst.omega, &inst.node_set(), 1e-8).unwrap();
        let h = inst.ugaheri_h();
        let check = mass_bound_check(&hat, Some(h), &inst.omega, 0.02);
        let bound = h * inst.omega.positive_part().total_mass();
        println!("  {name}: mass {:.4}, h·ω⁺(X) = {bound:.4}", hat.mass);
        worst = worst.max(hat.mass / bound);
        all &= matches!(check, MassBoundCheck::Holds { .. });
    }
    verdict(
        8,
        "mass bound on Riesz fixtures",
        all,
        format!("max ω̂(X)/(h·ω⁺(X)) = {worst:.4} (≤ 1.02)"),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_9_solvability_scan() {
    let start = Instant::now();
    let family: Vec<_> = (2..=4).map(|j| newtonian_shell_family(j, 150)).collect();
    let opts = ScanOptions {
        scalings: vec![0.0, 0.5, 0.75, 1.0, 1.5],
        unit_mass_row: true,
        tol: 1e-8,
    };
    let table = solvability_scan(&family, &opts).unwrap();
    for row in &table.rows {
        let last = row.cells.last().unwrap();
        println!(
            "  q = {:>9}: ω⁺(X) = {:.3}, mass(ω̂) = {:.4}, outer λ-fraction {:?}, {:?}",
            row.scaling.map(|q| q.to_string()).unwrap_or_else(|| "1/mass".into()),
            row.positive_mass,
            last.balayage_mass,
            row.cells.iter().map(|c| (c.outer_fraction * 1e3).round() / 1e3).collect::<Vec<_>>(),
            row.signature
        );
    }
    let stable_ok = table
        .rows
        .iter()
        .filter(|r| r.positive_mass >= 1.0)
        .all(|r| r.signature == RowSignature::Stable);
    let leak_ok = table
        .rows
        .iter()
        .filter(|r| r.scaling.is_some() && r.positive_mass < 1.0)
        .all(|r| r.signature == RowSignature::Leaking);
    verdict(
        9,
        "solvability scan on full Newtonian shells",
        stable_ok && leak_ok && table.all_passed(),
        format!("ω(X) ≥ 1 rows stable = {stable_ok}, ω⁺(X) < 1 rows leaking = {leak_ok}"),
        start.elapsed(),
        Duration::from_secs(300),
    );
}
