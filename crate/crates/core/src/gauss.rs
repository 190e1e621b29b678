//! The Gauss variational problem over unit-mass measures on a node subset.
//!
//! For `f = −U^ω` the problem minimizes `I_f(μ)` over positive μ on A with
//! `μ(X) = 1`. Its solution λ is characterized by
//! `U_f^λ ≥ c` at every node of A and `U_f^λ = c` on the support of λ, where
//! `c = ∫U_f^λ dλ` is the weighted equilibrium constant. With `ω = 0` it
//! reduces to the minimal-energy probability, whose renormalization is the
//! capacitary measure.

use serde::{Deserialize, Serialize};

use crate::balayage::{pseudo_balayage, BalayageResult};
use crate::energy::{energy, gauss_functional, potential, strong_distance};
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::measure::{Measure, SupportSet};
use crate::qp::{KktReport, SimplexQpProblem, SolveOptions};
use crate::tolerances::CERTIFICATE_FACTOR;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussResult {
    /// λ, a probability measure carried by A.
    pub measure: Measure,
    /// `w_f(A) = I_f(λ)`.
    pub value: f64,
    /// `c = ∫U_f^λ dλ`, computed by integration.
    pub equilibrium_constant: f64,
    /// The same constant read off the solver's multiplier.
    pub multiplier: f64,
    pub kkt: KktReport,
    /// `min_{i∈A} U_f^λ(i) − c`.
    pub ch1_min: f64,
    /// `max |U_f^λ − c|` over the support of λ.
    pub ch2_max: f64,
}

fn chain_field(kernel: &KernelMatrix, omega: &Measure, set: &SupportSet) -> Result<(Vec<f64>, Vec<f64>)> {
    omega.check_len(kernel.size())?;
    set.check_universe(kernel.size())?;
    let u = potential(kernel, omega)?;
    let f: Vec<f64> = set.indices().iter().map(|&i| -u[i]).collect();
    Ok((u, f))
}

pub fn solve_gauss(kernel: &KernelMatrix, omega: &Measure, set: &SupportSet, tol: f64) -> Result<GaussResult> {
    solve_gauss_with(kernel, omega, set, &SolveOptions::with_tol(tol))
}

pub fn solve_gauss_with(
    kernel: &KernelMatrix,
    omega: &Measure,
    set: &SupportSet,
    opts: &SolveOptions,
) -> Result<GaussResult> {
    let (u_omega, f) = chain_field(kernel, omega, set)?;
    let problem = SimplexQpProblem::new_unchecked(kernel.restrict(set), f);
    let sol = problem.solve(opts)?;
    let multiplier = sol.kkt.multiplier.unwrap_or(f64::NAN);
    let measure = Measure::embed(kernel.size(), set, &sol.weights);

    let u = potential(kernel, &measure)?;
    let weighted: Vec<f64> = u.iter().zip(&u_omega).map(|(a, b)| a - b).collect();
    let constant: f64 = measure.weights().iter().zip(&weighted).map(|(a, b)| a * b).sum();
    let limit = CERTIFICATE_FACTOR * opts.tol;
    if (constant - multiplier).abs() > limit {
        return Err(Error::CharacterizationViolated {
            invariant: "equilibrium constant: multiplier agrees with ∫U_f^λ dλ",
            residual: (constant - multiplier).abs(),
            limit,
        });
    }

    let threshold = opts.active_factor * opts.tol;
    let mut ch1_min = f64::INFINITY;
    let mut ch2_max = 0.0_f64;
    for &i in set.indices() {
        let d = weighted[i] - constant;
        ch1_min = ch1_min.min(d);
        if measure.weights()[i] > threshold {
            ch2_max = ch2_max.max(d.abs());
        }
    }
    // The solver's tolerance is on the full gradient 2(U_f^λ − c).
    if -ch1_min > limit {
        return Err(Error::CharacterizationViolated {
            invariant: "U_f^λ ≥ c at every node of A",
            residual: -ch1_min,
            limit,
        });
    }
    if ch2_max > limit {
        return Err(Error::CharacterizationViolated {
            invariant: "U_f^λ = c on the support of λ",
            residual: ch2_max,
            limit,
        });
    }

    Ok(GaussResult {
        value: gauss_functional(kernel, omega, &measure)?,
        measure,
        equilibrium_constant: constant,
        multiplier,
        kkt: sol.kkt,
        ch1_min,
        ch2_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// γ = μ*/‖μ*‖², with μ* the minimal-energy probability on the set.
    pub gamma: Measure,
    /// `c(Q) = γ(X) = 1/‖μ*‖²`.
    pub capacity: f64,
    /// `(min, max)` of `U^γ` over the set.
    pub equilibrium_potential_range: (f64, f64),
}

pub fn capacitary_measure(kernel: &KernelMatrix, set: &SupportSet, tol: f64) -> Result<CapacityResult> {
    let m = kernel.size();
    let base = solve_gauss(kernel, &Measure::zeros(m), set, tol)?;
    let e = energy(kernel, &base.measure)?;
    let gamma = base.measure.scaled(1.0 / e);
    let u = potential(kernel, &gamma)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut support_dev = 0.0_f64;
    for &i in set.indices() {
        lo = lo.min(u[i]);
        hi = hi.max(u[i]);
        if base.measure.weights()[i] > 10.0 * tol {
            support_dev = support_dev.max((u[i] - 1.0).abs());
        }
    }
    // Potential residuals of μ* are divided by ‖μ*‖² after rescaling.
    let limit = CERTIFICATE_FACTOR * tol * (1.0 / e).max(1.0);
    if 1.0 - lo > limit {
        return Err(Error::CharacterizationViolated {
            invariant: "U^γ ≥ 1 on the set",
            residual: 1.0 - lo,
            limit,
        });
    }
    if support_dev > limit {
        return Err(Error::CharacterizationViolated {
            invariant: "U^γ = 1 on the support of γ",
            residual: support_dev,
            limit,
        });
    }
    Ok(CapacityResult {
        capacity: gamma.total_mass(),
        gamma,
        equilibrium_potential_range: (lo, hi),
    })
}

/// Evidence that the Gauss problem has no solution on the set family that
/// this truncation stands in for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsolvableDiagnostic {
    /// ξ = ω̂^A, the extremal measure in this regime.
    pub xi: Measure,
    /// `ξ(X) < 1`.
    pub xi_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Solvability {
    Solvable(GaussResult),
    /// Truncation regime with `ω̂^A(X) ≥ 1`. `lambda_is_balayage` is set
    /// when the mass is 1 within tolerance and λ coincides with ω̂^A.
    SolvableViaBalayage {
        result: GaussResult,
        balayage_mass: f64,
        lambda_is_balayage: bool,
    },
    Unsolvable(UnsolvableDiagnostic),
}

impl Solvability {
    pub fn is_solvable(&self) -> bool {
        !matches!(self, Solvability::Unsolvable(_))
    }
}

/// Solvability of the Gauss problem on A.
///
/// A finite node set always has finite capacity, so with `capacity_finite`
/// the problem is solved directly. Otherwise A is treated as a stage of a
/// growing family standing in for a set of infinite capacity: the problem is
/// declared solvable iff `ω̂^A(X) ≥ 1`.
pub fn solvability_check(
    kernel: &KernelMatrix,
    omega: &Measure,
    set: &SupportSet,
    tol: f64,
    capacity_finite: bool,
) -> Result<Solvability> {
    if capacity_finite {
        return Ok(Solvability::Solvable(solve_gauss(kernel, omega, set, tol)?));
    }
    let hat = pseudo_balayage(kernel, omega, set, tol)?;
    if hat.mass < 1.0 - tol {
        return Ok(Solvability::Unsolvable(UnsolvableDiagnostic {
            xi_mass: hat.mass,
            xi: hat.measure,
        }));
    }
    let result = solve_gauss(kernel, omega, set, tol)?;
    let lambda_is_balayage =
        (hat.mass - 1.0).abs() <= tol && lambda_matches(kernel, &result, &hat)?;
    Ok(Solvability::SolvableViaBalayage {
        result,
        balayage_mass: hat.mass,
        lambda_is_balayage,
    })
}

fn lambda_matches(kernel: &KernelMatrix, g: &GaussResult, hat: &BalayageResult) -> Result<bool> {
    Ok(strong_distance(kernel, &g.measure, &hat.measure)? <= 1e-7)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalDiagnostic {
    /// `w_f(K_j)` per stage.
    pub sequence_values: Vec<f64>,
    /// `c_{K_j,f}` per stage.
    pub constants: Vec<f64>,
    /// λ on the final stage, the finite stand-in for ξ.
    pub limit_measure: Measure,
    pub limit_mass: f64,
    /// `C_ξ = ∫U_f^ξ dξ`.
    pub c_xi: f64,
    /// Strong distances between consecutive stage solutions.
    pub stage_steps: Vec<f64>,
}

pub(crate) fn check_increasing(chain: &[SupportSet]) -> Result<()> {
    for (j, pair) in chain.windows(2).enumerate() {
        if !(pair[0].is_subset_of(&pair[1]) && pair[0].len() < pair[1].len()) {
            return Err(Error::NotNested { stage: j + 1 });
        }
    }
    Ok(())
}

/// Solves the Gauss problem along an increasing chain ending at A, each
/// stage warm-started from the previous solution.
pub fn extremal_diagnostic(
    kernel: &KernelMatrix,
    omega: &Measure,
    nested: &[SupportSet],
    tol: f64,
) -> Result<ExtremalDiagnostic> {
    if nested.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    check_increasing(nested)?;
    let mut values = Vec::with_capacity(nested.len());
    let mut constants = Vec::with_capacity(nested.len());
    let mut steps = Vec::new();
    let mut prev: Option<GaussResult> = None;
    for set in nested {
        let mut opts = SolveOptions::with_tol(tol);
        if let Some(p) = &prev {
            opts = opts.start(p.measure.restricted(set));
        }
        let g = solve_gauss_with(kernel, omega, set, &opts)?;
        if let Some(p) = &prev {
            steps.push(strong_distance(kernel, &p.measure, &g.measure)?);
            let last = *values.last().unwrap_or(&f64::INFINITY);
            if g.value > last + CERTIFICATE_FACTOR * tol {
                return Err(Error::CharacterizationViolated {
                    invariant: "w_f(K) nonincreasing along an increasing chain",
                    residual: g.value - last,
                    limit: CERTIFICATE_FACTOR * tol,
                });
            }
        }
        values.push(g.value);
        constants.push(g.equilibrium_constant);
        prev = Some(g);
    }
    let last = prev.expect("chain is nonempty");
    let u = potential(kernel, &last.measure)?;
    let u_omega = potential(kernel, omega)?;
    let c_xi: f64 = last
        .measure
        .weights()
        .iter()
        .zip(u.iter().zip(&u_omega))
        .map(|(w, (a, b))| w * (a - b))
        .sum();
    let final_c = *constants.last().unwrap_or(&c_xi);
    if (final_c - c_xi).abs() > CERTIFICATE_FACTOR * tol {
        return Err(Error::CharacterizationViolated {
            invariant: "lim c_{K,f} = C_ξ",
            residual: (final_c - c_xi).abs(),
            limit: CERTIFICATE_FACTOR * tol,
        });
    }
    Ok(ExtremalDiagnostic {
        sequence_values: values,
        constants,
        limit_mass: last.measure.total_mass(),
        limit_measure: last.measure,
        c_xi,
        stage_steps: steps,
    })
}
