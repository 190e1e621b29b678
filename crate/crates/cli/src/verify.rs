//! `verify`: seeded oracle comparisons plus the invariant suite on every
//! fixture config in a directory.

use std::path::{Path, PathBuf};

use balayage_core::balayage::{pseudo_balayage, verify_ii1};
use balayage_core::energy::{energy, potential};
use balayage_core::experiments::{monotone_down, monotone_up, InvariantCheck};
use balayage_core::gauss::{capacitary_measure, solve_gauss};
use balayage_core::qp::{brute_force_cone, brute_force_simplex, ConeQpProblem, SimplexQpProblem, SolveOptions};
use balayage_core::tolerances::{ARITHMETIC, CERTIFICATE_FACTOR};
use balayage_core::SupportSet;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{self, Loaded, SetSpec};
use crate::CliError;

const ORACLE_SEEDS: u64 = 12;
const ORACLE_AGREEMENT: f64 = 1e-7;

#[derive(Debug, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub fixture: String,
    pub checks: Vec<InvariantCheck>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub oracle_checks: Vec<InvariantCheck>,
    pub fixtures: Vec<FixtureOutcome>,
}

impl VerifyOutput {
    pub fn all_checks(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.oracle_checks.iter().chain(self.fixtures.iter().flat_map(|f| &f.checks))
    }
}

/// Fixture configs in `dir`, sorted by file name.
pub fn fixture_paths(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Config(format!("fixture directory {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

fn random_spd(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    (b.transpose() * &b) / k as f64 + DMatrix::identity(k, k) * 0.1
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solver against enumeration on small seeded problems.
pub fn oracle_checks(tol: f64) -> Result<Vec<InvariantCheck>, CliError> {
    let mut cone_worst = 0.0_f64;
    let mut simplex_worst = 0.0_f64;
    let opts = SolveOptions::with_tol(tol.min(1e-10));
    for seed in 0..ORACLE_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..=10);
        let q = random_spd(&mut rng, k);
        let b: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cone = ConeQpProblem::new(q.clone(), b.clone())?;
        cone_worst = cone_worst.max(max_diff(&cone.solve(&opts)?.weights, &brute_force_cone(&cone)?));
        let simplex = SimplexQpProblem::new(q, b)?;
        simplex_worst = simplex_worst.max(max_diff(&simplex.solve(&opts)?.weights, &brute_force_simplex(&simplex)?));
    }
    Ok(vec![
        InvariantCheck::at_most("cone solver agrees with enumeration", cone_worst, ORACLE_AGREEMENT),
        InvariantCheck::at_most("simplex solver agrees with enumeration", simplex_worst, ORACLE_AGREEMENT),
    ])
}

/// Invariant suite for one fixture. Parse and validation failures come back
/// as failed checks so that a corrupted fixture is reported like any other
/// failing invariant.
pub fn fixture_checks(path: &Path, tol_flag: Option<f64>) -> Vec<InvariantCheck> {
    let loaded = match config::load(path) {
        Ok(l) => l,
        Err(e) => return vec![failed(&format!("fixture parses: {e}"))],
    };
    match run_fixture(&loaded, loaded.tol(tol_flag)) {
        Ok(checks) => checks,
        Err(e) => vec![failed(&format!("fixture solves: {e}"))],
    }
}

fn failed(name: &str) -> InvariantCheck {
    InvariantCheck {
        name: name.to_string(),
        passed: false,
        worst: f64::NAN,
        limit: 0.0,
    }
}

fn run_fixture(loaded: &Loaded, tol: f64) -> Result<Vec<InvariantCheck>, CliError> {
    let cfg = &loaded.config;
    let mut checks = Vec::new();
    if cfg.instance.is_none() {
        return Ok(vec![failed("fixture has an instance source")]);
    }
    let problem = loaded.problem()?;
    let set = problem.set(cfg.set.as_ref().unwrap_or(&SetSpec::All))?;
    let kernel = &problem.kernel;
    let mut omega = problem.omega.clone();
    let limit = CERTIFICATE_FACTOR * tol;

    let mut hat = pseudo_balayage(kernel, &omega, &set, tol)?;
    if cfg.unit_balayage_mass && hat.mass > 0.0 {
        omega = omega.scaled(1.0 / hat.mass);
        hat = pseudo_balayage(kernel, &omega, &set, tol)?;
    }
    let r = &hat.residuals;
    checks.push(InvariantCheck::at_most("U^ω̂ ≥ U^ω on A", -r.domination_min, limit));
    checks.push(InvariantCheck::at_most("U^ω̂ = U^ω on the support of ω̂", r.support_equality_max, limit));
    checks.push(InvariantCheck::at_most("∫U^(ω̂−ω) dω̂ = 0", r.orthogonality.abs(), limit));
    let ii1 = verify_ii1(kernel, &omega, &set, &hat.measure, limit)?;
    checks.push(InvariantCheck::at_most("variational inequalities hold", if ii1.holds { 0.0 } else { 1.0 }, 0.0));

    // Value bracket −2·max_A U^{|ω|}·ω̂(X) ≤ ŵ ≤ 0.
    let u_abs = potential(kernel, &omega.variation())?;
    let m_a = set.indices().iter().map(|&i| u_abs[i]).fold(0.0, f64::max);
    let lower = -2.0 * m_a * hat.mass;
    checks.push(InvariantCheck::at_most("ŵ_f(A) ≤ 0", hat.value, limit));
    checks.push(InvariantCheck::at_most("ŵ_f(A) ≥ −2·max_A U^|ω|·ω̂(X)", lower - hat.value, limit));

    // Strong-Cauchy inequality between A and the full node set.
    let all = problem.set(&SetSpec::All)?;
    if set.is_subset_of(&all) && set.len() < all.len() {
        let big = pseudo_balayage(kernel, &omega, &all, tol)?;
        let d2 = energy(kernel, &hat.measure.sub(&big.measure))?;
        let slack = 2.0 * hat.value - 2.0 * big.value - d2;
        checks.push(InvariantCheck::at_most("‖ω̂^A − ω̂^X‖² ≤ 2ŵ(A) − 2ŵ(X)", -slack, limit));
    }

    let g = solve_gauss(kernel, &omega, &set, tol)?;
    checks.push(InvariantCheck::at_most("U_f^λ ≥ c on A", -g.ch1_min, limit));
    checks.push(InvariantCheck::at_most("ŵ_f(A) ≤ w_f(A)", hat.value - g.value, ARITHMETIC.max(limit)));

    if let Some(specs) = &cfg.chain {
        let chain = specs.iter().map(|s| problem.set(s)).collect::<Result<Vec<SupportSet>, _>>()?;
        let increasing = chain.windows(2).all(|p| p[0].is_subset_of(&p[1]));
        let report = if increasing {
            monotone_up(kernel, &omega, &chain, tol)?
        } else {
            monotone_down(kernel, &omega, &chain, tol)?
        };
        checks.extend(report.checks);
    }

    if let Some(exp) = &cfg.expect {
        if exp.zero_balayage {
            checks.push(InvariantCheck::at_most("ω̂^A = 0", hat.mass, ARITHMETIC));
        }
        if let Some(target) = exp.balayage_mass {
            let rel = (hat.mass - target).abs() / target.abs().max(1.0);
            checks.push(InvariantCheck::at_most("expected ω̂^A(X)", rel, exp.relative));
        }
        if let Some(target) = exp.capacity {
            let cap = capacitary_measure(kernel, &set, tol)?;
            let rel = (cap.capacity - target).abs() / target.abs().max(f64::MIN_POSITIVE);
            checks.push(InvariantCheck::at_most("expected capacity", rel, exp.relative));
        }
    }
    Ok(checks)
}

pub fn run(dir: &Path, tol_flag: Option<f64>) -> Result<VerifyOutput, CliError> {
    let paths = fixture_paths(dir)?;
    let oracle_checks = oracle_checks(tol_flag.unwrap_or(balayage_core::tolerances::SOLVER_KKT))?;
    let fixtures = paths
        .iter()
        .map(|p| FixtureOutcome {
            fixture: p.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            checks: fixture_checks(p, tol_flag),
        })
        .collect();
    Ok(VerifyOutput { oracle_checks, fixtures })
}
