//! Active-set polish: exact solves on the free set with exchange steps.

use nalgebra::{DMatrix, DVector};

use super::{QpSolution, SolveOptions};
use crate::error::{Error, Result};

pub(crate) struct Polished {
    pub weights: Vec<f64>,
    pub multiplier: Option<f64>,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

fn objective(q: &DMatrix<f64>, c: &DVector<f64>, w: &[f64]) -> f64 {
    let wv = DVector::from_column_slice(w);
    wv.dot(&(q * &wv)) + 2.0 * c.dot(&wv)
}

/// Minimizer of `zᵀQ_FF z + 2c_Fᵀz` on the free set (optionally with
/// `Σz = 1`), returning the reduced solution and the simplex multiplier.
fn reduced_solve(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    free: &[usize],
    simplex: bool,
) -> Result<(Vec<f64>, Option<f64>)> {
    let n = free.len();
    let qff = DMatrix::from_fn(n, n, |a, b| q[(free[a], free[b])]);
    let cf = DVector::from_iterator(n, free.iter().map(|&i| c[i]));
    let chol = qff.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        witness: vec![],
        energy: f64::NAN,
    })?;
    if simplex {
        // Q z + c = λ·1, Σz = 1.
        let y1 = chol.solve(&DVector::from_element(n, 1.0));
        let y2 = chol.solve(&cf);
        let lambda = (1.0 + y2.sum()) / y1.sum();
        let z = y1 * lambda - y2;
        Ok((z.iter().copied().collect(), Some(lambda)))
    } else {
        let z = chol.solve(&(-cf));
        Ok((z.iter().copied().collect(), None))
    }
}

pub(crate) fn polish(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    initial: &[f64],
    simplex: bool,
    opts: &SolveOptions,
) -> Result<Polished> {
    let k = c.len();
    let threshold = opts.active_factor * opts.tol;
    let mut free: Vec<bool> = initial.iter().map(|&w| w > threshold).collect();
    if simplex && !free.iter().any(|&f| f) {
        let imax = (0..k).fold(0, |a, i| if initial[i] > initial[a] { i } else { a });
        free[imax] = true;
    }
    let mut w: Vec<f64> = (0..k).map(|i| if free[i] { initial[i] } else { 0.0 }).collect();
    if simplex {
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
    }
    let mut trace = vec![objective(q, c, &w)];
    let mut single_entry = false;
    let mut last_entered: Option<usize> = None;
    let mut multiplier = None;

    for iter in 1..=opts.max_iter {
        let idx: Vec<usize> = (0..k).filter(|&i| free[i]).collect();
        let (z, lambda) = if idx.is_empty() {
            (vec![], None)
        } else {
            reduced_solve(q, c, &idx, simplex)?
        };

        if z.iter().all(|&v| v > 0.0) {
            for i in 0..k {
                w[i] = 0.0;
            }
            for (&i, &v) in idx.iter().zip(&z) {
                w[i] = v;
            }
            multiplier = lambda;
            trace.push(objective(q, c, &w));

            // Half-gradient slack on the active set: (Qw + c)_i − λ.
            let wv = DVector::from_column_slice(&w);
            let h = q * &wv + c;
            let shift = lambda.unwrap_or(0.0);
            let row_scale = |i: usize| {
                let mut s = c[i].abs() + shift.abs();
                for j in &idx {
                    s += (q[(i, *j)] * w[*j]).abs();
                }
                s
            };
            let mut violators: Vec<(usize, f64)> = (0..k)
                .filter(|&i| !free[i])
                .map(|i| (i, h[i] - shift))
                .filter(|&(i, s)| s < -1e-12 * (1.0 + row_scale(i)))
                .collect();
            if violators.is_empty() {
                return Ok(Polished {
                    weights: w,
                    multiplier,
                    iterations: iter,
                    trace,
                });
            }
            violators.sort_by(|a, b| a.1.total_cmp(&b.1));
            if single_entry {
                violators.truncate(1);
            }
            last_entered = if violators.len() == 1 { Some(violators[0].0) } else { None };
            for (i, _) in violators {
                free[i] = true;
            }
        } else {
            // Move from w toward z until the first free weight hits zero.
            let mut alpha = 1.0_f64;
            let mut binding = Vec::new();
            for (&i, &zi) in idx.iter().zip(&z) {
                if zi <= 0.0 {
                    let a = w[i] / (w[i] - zi);
                    if a < alpha {
                        alpha = a;
                        binding.clear();
                    }
                    if a == alpha {
                        binding.push(i);
                    }
                }
            }
            let alpha = alpha.max(0.0);
            for (&i, &zi) in idx.iter().zip(&z) {
                w[i] += alpha * (zi - w[i]);
            }
            let mut dropped = binding;
            for &i in &idx {
                if w[i] <= 0.0 && !dropped.contains(&i) {
                    dropped.push(i);
                }
            }
            for &i in &dropped {
                free[i] = false;
                w[i] = 0.0;
            }
            if simplex {
                let s: f64 = w.iter().sum();
                if s > 0.0 {
                    w.iter_mut().for_each(|x| *x /= s);
                }
            }
            trace.push(objective(q, c, &w));
            if alpha == 0.0 {
                if single_entry && last_entered.is_some_and(|j| dropped.contains(&j)) {
                    // The entering index cannot rise above zero: its slack
                    // violation is round-off.
                    return Ok(Polished {
                        weights: w,
                        multiplier,
                        iterations: iter,
                        trace,
                    });
                }
                single_entry = true;
            }
        }
    }
    let wv = DVector::from_column_slice(&w);
    let shift = multiplier.unwrap_or(0.0);
    let g: Vec<f64> = (q * &wv + c).iter().map(|h| 2.0 * (h - shift)).collect();
    let best = QpSolution {
        objective: objective(q, c, &w),
        kkt: super::kkt_report(&w, &g, threshold, multiplier),
        weights: w,
        gradient_iterations: 0,
        polish_iterations: opts.max_iter,
        gradient_trace: vec![],
        polish_trace: trace,
    };
    Err(Error::MaxIterExceeded {
        iterations: opts.max_iter,
        best: Box::new(best),
    })
}
