//! Projected gradient with Barzilai–Borwein steps.

use nalgebra::{DMatrix, DVector};

use super::projection::project_simplex;
use super::SolveOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Feasible {
    Cone,
    Simplex,
}

impl Feasible {
    fn project(self, v: &[f64]) -> Vec<f64> {
        match self {
            Feasible::Cone => v.iter().map(|x| x.max(0.0)).collect(),
            Feasible::Simplex => project_simplex(v),
        }
    }
}

pub(crate) struct Phase {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

/// Objective `wᵀQw + 2cᵀw` and gradient `2(Qw + c)` from one product.
fn evaluate(q: &DMatrix<f64>, c: &DVector<f64>, w: &[f64]) -> (f64, DVector<f64>) {
    let wv = DVector::from_column_slice(w);
    let qw = q * &wv;
    let obj = wv.dot(&qw) + 2.0 * c.dot(&wv);
    (obj, 2.0 * (qw + c))
}

pub(crate) fn run(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    start: Vec<f64>,
    feasible: Feasible,
    opts: &SolveOptions,
) -> Phase {
    let k = c.len();
    // Lipschitz bound of the gradient: 2·max row sum ≥ 2·λ_max(Q).
    let lip = 2.0
        * q.row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let (step_min, step_max) = (1e-6 / lip, 1e6 / lip);
    let scale = 1.0 + c.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let stop = opts.tol.max(1e-7 * scale);

    let mut w = feasible.project(&start);
    let (mut fval, mut g) = evaluate(q, c, &w);
    let mut step = 1.0 / lip;
    let mut trace = vec![fval];
    let mut iterations = 0;

    for _ in 0..opts.gradient_iters.min(opts.max_iter) {
        let trial: Vec<f64> = w.iter().zip(g.iter()).map(|(wi, gi)| wi - gi).collect();
        let residual = feasible
            .project(&trial)
            .iter()
            .zip(&w)
            .fold(0.0_f64, |a, (p, wi)| a.max((p - wi).abs()));
        if residual <= stop {
            break;
        }
        iterations += 1;

        // Backtrack until the objective does not increase.
        let mut accepted = None;
        let mut t = step;
        for _ in 0..60 {
            let x: Vec<f64> = w.iter().zip(g.iter()).map(|(wi, gi)| wi - t * gi).collect();
            let cand = feasible.project(&x);
            let (fc, gc) = evaluate(q, c, &cand);
            if fc <= fval {
                accepted = Some((cand, fc, gc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc, gc)) = accepted else {
            break;
        };

        let s = DVector::from_iterator(k, cand.iter().zip(&w).map(|(a, b)| a - b));
        let y = &gc - &g;
        let sy = s.dot(&y);
        step = if sy > 0.0 { (s.dot(&s) / sy).clamp(step_min, step_max) } else { step_max };

        let moved = s.amax();
        w = cand;
        g = gc;
        fval = fc;
        trace.push(fval);
        if moved == 0.0 {
            break;
        }
    }
    Phase {
        weights: w,
        iterations,
        trace,
    }
}
