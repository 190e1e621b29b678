//! Convex quadratic minimization over the nonnegative cone and the
//! probability simplex.
//!
//! Both problems share the objective `wᵀQw + 2cᵀw` with `Q` strictly
//! positive definite:
//!
//! - cone:    minimize `wᵀQw − 2bᵀw` over `w ≥ 0` (so `c = −b`);
//! - simplex: minimize `wᵀQw + 2fᵀw` over `w ≥ 0, Σw = 1` (so `c = f`).
//!
//! The solver runs a projected-gradient phase with Barzilai–Borwein steps and
//! a monotone backtracking safeguard, then an active-set polish that solves
//! the reduced linear system on the detected support and repairs it with
//! Lawson–Hanson style exchange steps until the KKT conditions hold to
//! round-off. [`oracle`] holds exhaustive enumeration solvers for small `k`.

mod active_set;
mod gradient;
pub mod oracle;
mod projection;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::check_energy_principle;
use crate::tolerances;

pub use oracle::{brute_force_cone, brute_force_simplex};
pub use projection::project_simplex;

/// Solver controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// KKT tolerance on the (full, factor-2) gradient residuals.
    pub tol: f64,
    /// Iteration cap for each of the gradient phase and the polish.
    pub max_iter: usize,
    /// Optional feasible starting point (projected if slightly infeasible).
    pub start: Option<Vec<f64>>,
    /// Weight `w_i` counts as active iff `w_i <= active_factor * tol`.
    pub active_factor: f64,
    /// Cap on projected-gradient iterations before the polish takes over.
    pub gradient_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: tolerances::SOLVER_KKT,
            max_iter: 10_000,
            start: None,
            active_factor: tolerances::ACTIVE_FACTOR,
            gradient_iters: 500,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    fn validate(&self, k: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(s) = &self.start {
            if s.len() != k {
                return Err(Error::SizeMismatch {
                    expected: k,
                    found: s.len(),
                });
            }
        }
        Ok(())
    }
}

/// KKT residuals of a candidate solution.
///
/// With `g` the gradient (`2(Qw − b)` for the cone, `2(Qw + f) − 2c` for the
/// simplex):
/// stationarity is `max(0, −min g)`, complementarity `max |w_i g_i|`,
/// feasibility the worst violation of `w ≥ 0` (and of `Σw = 1`), and the
/// support residual `max |g_i|` over weights above the active threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub stationarity_residual: f64,
    pub complementarity_residual: f64,
    pub feasibility_residual: f64,
    pub support_residual: f64,
    /// `Σ w_i g_i`, the duality gap when the gradient is dual feasible.
    pub gap_estimate: f64,
    /// Simplex only: the constant `c` with `(Qw + f)_i >= c` everywhere and
    /// equality on the support. The gradient multiplier is `2c`.
    pub multiplier: Option<f64>,
}

impl KktReport {
    pub fn worst(&self) -> f64 {
        self.stationarity_residual
            .max(self.complementarity_residual)
            .max(self.feasibility_residual)
            .max(self.support_residual)
    }

    pub fn satisfied(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub kkt: KktReport,
    pub gradient_iterations: usize,
    pub polish_iterations: usize,
    /// Objective after each accepted projected-gradient step.
    pub gradient_trace: Vec<f64>,
    /// Objective after each polish step, starting from the thresholded
    /// gradient-phase iterate.
    pub polish_trace: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct QpDocument {
    q: Vec<Vec<f64>>,
    #[serde(alias = "b", alias = "f")]
    linear: Vec<f64>,
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let k = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::SizeMismatch {
            expected: k,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn validate_problem(q: &DMatrix<f64>, linear: &[f64]) -> Result<()> {
    let k = q.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("empty problem".into()));
    }
    if q.ncols() != k || linear.len() != k {
        return Err(Error::SizeMismatch {
            expected: k,
            found: if q.ncols() != k { q.ncols() } else { linear.len() },
        });
    }
    for i in 0..k {
        for j in 0..i {
            let (a, b) = (q[(i, j)], q[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    check_energy_principle(q)?;
    Ok(())
}

/// Minimize `wᵀQw − 2bᵀw` over `w ≥ 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "QpDocument", into = "QpDocument")]
pub struct ConeQpProblem {
    q: DMatrix<f64>,
    b: DVector<f64>,
}

impl TryFrom<QpDocument> for ConeQpProblem {
    type Error = Error;
    fn try_from(doc: QpDocument) -> Result<Self> {
        Self::new(matrix_from_rows(&doc.q)?, doc.linear)
    }
}

impl From<ConeQpProblem> for QpDocument {
    fn from(p: ConeQpProblem) -> Self {
        QpDocument {
            q: rows_of(&p.q),
            linear: p.b.iter().copied().collect(),
        }
    }
}

impl ConeQpProblem {
    /// Validates symmetry and strict positive definiteness of `q`.
    pub fn new(q: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        validate_problem(&q, &b)?;
        Ok(Self::new_unchecked(q, b))
    }

    /// For principal submatrices of an already certified kernel.
    pub(crate) fn new_unchecked(q: DMatrix<f64>, b: Vec<f64>) -> Self {
        Self {
            q,
            b: DVector::from_vec(b),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn b(&self) -> &[f64] {
        self.b.as_slice()
    }

    pub fn scaled_b(&self, factor: f64) -> Self {
        Self {
            q: self.q.clone(),
            b: &self.b * factor,
        }
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        w.dot(&(&self.q * &w)) - 2.0 * self.b.dot(&w)
    }

    /// `2(Qw − b)`.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let w = DVector::from_column_slice(w);
        (2.0 * (&self.q * &w - &self.b)).iter().copied().collect()
    }

    pub fn kkt(&self, w: &[f64], active_threshold: f64) -> KktReport {
        let g = self.gradient(w);
        kkt_report(w, &g, active_threshold, None)
    }

    pub fn solve(&self, opts: &SolveOptions) -> Result<QpSolution> {
        opts.validate(self.dim())?;
        let k = self.dim();
        let threshold = opts.active_factor * opts.tol;
        if k == 1 {
            let w = vec![self.b[0].max(0.0) / self.q[(0, 0)]];
            return Ok(self.finish(w, 0, 0, vec![], vec![], threshold));
        }
        if self.b.iter().all(|&v| v <= 0.0) {
            return Ok(self.finish(vec![0.0; k], 0, 0, vec![], vec![], threshold));
        }
        let c = -&self.b;
        let start: Vec<f64> = match &opts.start {
            Some(s) => s.iter().map(|v| v.max(0.0)).collect(),
            None => (0..k).map(|i| self.b[i].max(0.0) / self.q[(i, i)]).collect(),
        };
        let phase = gradient::run(&self.q, &c, start, gradient::Feasible::Cone, opts);
        let polished = active_set::polish(&self.q, &c, &phase.weights, false, opts)?;
        let sol = self.finish(
            polished.weights,
            phase.iterations,
            polished.iterations,
            phase.trace,
            polished.trace,
            threshold,
        );
        check_converged(sol, opts.tol)
    }

    fn finish(
        &self,
        w: Vec<f64>,
        gi: usize,
        pi: usize,
        gt: Vec<f64>,
        pt: Vec<f64>,
        threshold: f64,
    ) -> QpSolution {
        QpSolution {
            objective: self.objective(&w),
            kkt: self.kkt(&w, threshold),
            weights: w,
            gradient_iterations: gi,
            polish_iterations: pi,
            gradient_trace: gt,
            polish_trace: pt,
        }
    }
}

/// Minimize `wᵀQw + 2fᵀw` over the probability simplex.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "QpDocument", into = "QpDocument")]
pub struct SimplexQpProblem {
    q: DMatrix<f64>,
    f: DVector<f64>,
}

impl TryFrom<QpDocument> for SimplexQpProblem {
    type Error = Error;
    fn try_from(doc: QpDocument) -> Result<Self> {
        Self::new(matrix_from_rows(&doc.q)?, doc.linear)
    }
}

impl From<SimplexQpProblem> for QpDocument {
    fn from(p: SimplexQpProblem) -> Self {
        QpDocument {
            q: rows_of(&p.q),
            linear: p.f.iter().copied().collect(),
        }
    }
}

impl SimplexQpProblem {
    pub fn new(q: DMatrix<f64>, f: Vec<f64>) -> Result<Self> {
        validate_problem(&q, &f)?;
        Ok(Self::new_unchecked(q, f))
    }

    pub(crate) fn new_unchecked(q: DMatrix<f64>, f: Vec<f64>) -> Self {
        Self {
            q,
            f: DVector::from_vec(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn f(&self) -> &[f64] {
        self.f.as_slice()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        w.dot(&(&self.q * &w)) + 2.0 * self.f.dot(&w)
    }

    /// `Qw + f`, the weighted potential on the index set.
    pub fn half_gradient(&self, w: &[f64]) -> Vec<f64> {
        let w = DVector::from_column_slice(w);
        (&self.q * &w + &self.f).iter().copied().collect()
    }

    /// KKT report with multiplier `c`; `c` defaults to `Σ w_i (Qw + f)_i`.
    pub fn kkt(&self, w: &[f64], multiplier: Option<f64>, active_threshold: f64) -> KktReport {
        let h = self.half_gradient(w);
        let c = multiplier.unwrap_or_else(|| w.iter().zip(&h).map(|(a, b)| a * b).sum());
        let g: Vec<f64> = h.iter().map(|v| 2.0 * (v - c)).collect();
        kkt_report(w, &g, active_threshold, Some(c))
    }

    pub fn solve(&self, opts: &SolveOptions) -> Result<QpSolution> {
        opts.validate(self.dim())?;
        let k = self.dim();
        let threshold = opts.active_factor * opts.tol;
        if k == 1 {
            let c = self.q[(0, 0)] + self.f[0];
            return Ok(self.finish(vec![1.0], c, 0, 0, vec![], vec![], threshold));
        }
        let start = match &opts.start {
            Some(s) => s.clone(),
            None => vec![1.0 / k as f64; k],
        };
        let phase = gradient::run(&self.q, &self.f, start, gradient::Feasible::Simplex, opts);
        let polished = active_set::polish(&self.q, &self.f, &phase.weights, true, opts)?;
        let c = polished.multiplier.unwrap_or(f64::NAN);
        let sol = self.finish(
            polished.weights,
            c,
            phase.iterations,
            polished.iterations,
            phase.trace,
            polished.trace,
            threshold,
        );
        check_converged(sol, opts.tol)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        w: Vec<f64>,
        c: f64,
        gi: usize,
        pi: usize,
        gt: Vec<f64>,
        pt: Vec<f64>,
        threshold: f64,
    ) -> QpSolution {
        QpSolution {
            objective: self.objective(&w),
            kkt: self.kkt(&w, Some(c), threshold),
            weights: w,
            gradient_iterations: gi,
            polish_iterations: pi,
            gradient_trace: gt,
            polish_trace: pt,
        }
    }
}

fn kkt_report(w: &[f64], g: &[f64], threshold: f64, multiplier: Option<f64>) -> KktReport {
    let mut rep = KktReport {
        stationarity_residual: 0.0,
        complementarity_residual: 0.0,
        feasibility_residual: 0.0,
        support_residual: 0.0,
        gap_estimate: 0.0,
        multiplier,
    };
    for (&wi, &gi) in w.iter().zip(g) {
        rep.stationarity_residual = rep.stationarity_residual.max(-gi);
        rep.complementarity_residual = rep.complementarity_residual.max((wi * gi).abs());
        rep.feasibility_residual = rep.feasibility_residual.max(-wi);
        if wi > threshold {
            rep.support_residual = rep.support_residual.max(gi.abs());
        }
        rep.gap_estimate += wi * gi;
    }
    if multiplier.is_some() {
        let s: f64 = w.iter().sum();
        rep.feasibility_residual = rep.feasibility_residual.max((s - 1.0).abs());
    }
    rep
}

fn check_converged(sol: QpSolution, tol: f64) -> Result<QpSolution> {
    if sol.kkt.satisfied(tol) {
        Ok(sol)
    } else {
        Err(Error::MaxIterExceeded {
            iterations: sol.gradient_iterations + sol.polish_iterations,
            best: Box::new(sol),
        })
    }
}

/// Solves the cone problem with the given tolerance and iteration cap.
pub fn solve_cone_qp(p: &ConeQpProblem, tol: f64, max_iter: usize) -> Result<QpSolution> {
    p.solve(&SolveOptions::with_tol(tol).max_iter(max_iter))
}

/// Solves the simplex problem with the given tolerance and iteration cap.
pub fn solve_simplex_qp(p: &SimplexQpProblem, tol: f64, max_iter: usize) -> Result<QpSolution> {
    p.solve(&SolveOptions::with_tol(tol).max_iter(max_iter))
}
