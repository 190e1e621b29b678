//! Exhaustive active-set enumeration for small problems.
//!
//! Independent of the iterative solver: every support pattern is tried with
//! an LU solve of its stationarity system, and the feasible candidate with
//! the least objective wins.

use nalgebra::{DMatrix, DVector};

use super::{ConeQpProblem, SimplexQpProblem};
use crate::error::{Error, Result};
use crate::tolerances::ORACLE_MAX_K;

fn check_size(k: usize) -> Result<()> {
    if k > ORACLE_MAX_K {
        return Err(Error::TooLarge {
            k,
            max: ORACLE_MAX_K,
        });
    }
    Ok(())
}

fn members(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|i| mask >> i & 1 == 1).collect()
}

/// Enumerates all `2^k` free sets of the cone problem.
pub fn brute_force_cone(p: &ConeQpProblem) -> Result<Vec<f64>> {
    let k = p.dim();
    check_size(k)?;
    let (q, b) = (p.q(), p.b());
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut best_kkt: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1usize << k) {
        let free = members(mask, k);
        let n = free.len();
        let mut w = vec![0.0; k];
        if n > 0 {
            let qff = DMatrix::from_fn(n, n, |a, c| q[(free[a], free[c])]);
            let bf = DVector::from_iterator(n, free.iter().map(|&i| b[i]));
            let Some(z) = qff.lu().solve(&bf) else { continue };
            let zmax = z.amax();
            if z.iter().any(|&v| v < -1e-12 * (1.0 + zmax)) {
                continue;
            }
            for (&i, &v) in free.iter().zip(z.iter()) {
                w[i] = v.max(0.0);
            }
        }
        let obj = p.objective(&w);
        let g = p.gradient(&w);
        let gscale = 1.0 + g.iter().fold(0.0_f64, |a, v| a.max(v.abs())) + b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let dual_ok = (0..k).all(|i| free.contains(&i) || g[i] >= -1e-9 * gscale);
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, w.clone()));
        }
        if dual_ok && best_kkt.as_ref().is_none_or(|(o, _)| obj < *o) {
            best_kkt = Some((obj, w));
        }
    }
    Ok(best_kkt.or(best).map(|(_, w)| w).unwrap_or_else(|| vec![0.0; k]))
}

/// Enumerates all nonempty supports of the simplex problem.
pub fn brute_force_simplex(p: &SimplexQpProblem) -> Result<Vec<f64>> {
    let k = p.dim();
    check_size(k)?;
    let (q, f) = (p.q(), p.f());
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut best_kkt: Option<(f64, Vec<f64>)> = None;
    for mask in 1..(1usize << k) {
        let free = members(mask, k);
        let n = free.len();
        // [Q_FF  −1; 1ᵀ 0] [z; c] = [−f_F; 1]
        let mut sys = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = DVector::zeros(n + 1);
        for a in 0..n {
            for c in 0..n {
                sys[(a, c)] = q[(free[a], free[c])];
            }
            sys[(a, n)] = -1.0;
            sys[(n, a)] = 1.0;
            rhs[a] = -f[free[a]];
        }
        rhs[n] = 1.0;
        let Some(sol) = sys.lu().solve(&rhs) else { continue };
        let z = sol.rows(0, n);
        let zmax = z.amax();
        if z.iter().any(|&v| v < -1e-12 * (1.0 + zmax)) {
            continue;
        }
        let mut w = vec![0.0; k];
        for (&i, &v) in free.iter().zip(z.iter()) {
            w[i] = v.max(0.0);
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let c = sol[n];
        let h = p.half_gradient(&w);
        let hscale = 1.0 + h.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let dual_ok = (0..k).all(|i| free.contains(&i) || h[i] - c >= -1e-9 * hscale);
        let obj = p.objective(&w);
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, w.clone()));
        }
        if dual_ok && best_kkt.as_ref().is_none_or(|(o, _)| obj < *o) {
            best_kkt = Some((obj, w));
        }
    }
    best_kkt
        .or(best)
        .map(|(_, w)| w)
        .ok_or_else(|| Error::InvalidParameter("no feasible support found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_large_rejected() {
        let k = ORACLE_MAX_K + 1;
        let p = ConeQpProblem::new(DMatrix::identity(k, k), vec![1.0; k]).unwrap();
        assert!(matches!(brute_force_cone(&p), Err(Error::TooLarge { .. })));
        let s = SimplexQpProblem::new(DMatrix::identity(k, k), vec![0.0; k]).unwrap();
        assert!(matches!(brute_force_simplex(&s), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn closed_forms() {
        let p = ConeQpProblem::new(DMatrix::from_element(1, 1, 2.0), vec![3.0]).unwrap();
        assert_eq!(brute_force_cone(&p).unwrap(), vec![1.5]);
        let p = ConeQpProblem::new(DMatrix::identity(3, 3), vec![-1.0, -2.0, 0.0]).unwrap();
        assert_eq!(brute_force_cone(&p).unwrap(), vec![0.0; 3]);
        let s = SimplexQpProblem::new(DMatrix::identity(2, 2), vec![0.0, 0.0]).unwrap();
        let w = brute_force_simplex(&s).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }
}
