//! Resolution-refinement studies on Riesz sphere instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balayage::pseudo_balayage;
use crate::error::{Error, Result};
use crate::gauss::capacitary_measure;
use crate::instances::{unit_sphere, ChargeAtom, Geometry, Instance, InstanceSpec, KernelSpec, Regularization};

/// Values of one quantity at increasing resolutions and their extrapolated
/// limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub label: String,
    pub resolutions: Vec<usize>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Observed convergence order `p` in `error ~ m^{−p}`, when the last
    /// three values contract geometrically.
    pub observed_order: Option<f64>,
    /// `|v_last − limit| / |limit|`.
    pub last_relative_error: f64,
}

/// Aitken extrapolation of the last three values at resolutions with a
/// common ratio. Falls back to Richardson with the given order when the
/// differences do not contract.
pub fn aitken_limit(resolutions: &[usize], values: &[f64], fallback_order: f64) -> Result<(f64, Option<f64>)> {
    let k = values.len();
    if k < 2 || resolutions.len() != k {
        return Err(Error::InvalidParameter("refinement needs at least two stages".into()));
    }
    let ratio = resolutions[k - 1] as f64 / resolutions[k - 2] as f64;
    if k >= 3 {
        let (a, b, c) = (values[k - 3], values[k - 2], values[k - 1]);
        let r = (a - b) / (b - c);
        if r.is_finite() && r > 1.0 {
            return Ok((c - (b - c) / (r - 1.0), Some(r.ln() / ratio.ln())));
        }
    }
    let (b, c) = (values[k - 2], values[k - 1]);
    let factor = ratio.powf(fallback_order);
    Ok((c + (c - b) / (factor - 1.0), None))
}

fn sphere_spec(alpha: f64, radius: f64, m: usize, charges: Vec<ChargeAtom>) -> InstanceSpec {
    InstanceSpec {
        dimension: 3,
        kernel: KernelSpec::Riesz { alpha },
        geometry: Geometry::Sphere {
            radius,
            m,
            center: None,
        },
        regularization: Regularization::NearestNeighborHalf,
        charges,
    }
}

fn study(label: String, resolutions: &[usize], values: Vec<f64>) -> Result<RefinementStudy> {
    // Atomic discretizations of smooth measures converge like m^{-1/2}.
    let (limit, order) = aitken_limit(resolutions, &values, 0.5)?;
    let last = *values.last().expect("nonempty");
    Ok(RefinementStudy {
        label,
        resolutions: resolutions.to_vec(),
        last_relative_error: ((last - limit) / limit).abs(),
        values,
        limit,
        observed_order: order,
    })
}

/// Capacity of the Riesz sphere of radius `radius` in R^3 at each resolution.
pub fn sphere_capacity_study(alpha: f64, radius: f64, resolutions: &[usize], tol: f64) -> Result<RefinementStudy> {
    let values = resolutions
        .par_iter()
        .map(|&m| {
            let inst = Instance::build(&sphere_spec(alpha, radius, m, vec![]))?;
            Ok(capacitary_measure(&inst.kernel, &inst.node_set(), tol)?.capacity)
        })
        .collect::<Result<Vec<f64>>>()?;
    study(format!("capacity of Riesz sphere (alpha={alpha}, R={radius})"), resolutions, values)
}

/// Mass swept onto the sphere of radius `radius` from a unit charge at
/// distance `d` from the centre.
pub fn swept_mass_study(alpha: f64, radius: f64, d: f64, resolutions: &[usize], tol: f64) -> Result<RefinementStudy> {
    let values = resolutions
        .par_iter()
        .map(|&m| {
            let charge = ChargeAtom {
                point: vec![d, 0.0, 0.0],
                mass: 1.0,
            };
            let inst = Instance::build(&sphere_spec(alpha, radius, m, vec![charge]))?;
            Ok(pseudo_balayage(&inst.kernel, &inst.omega, &inst.node_set(), tol)?.mass)
        })
        .collect::<Result<Vec<f64>>>()?;
    study(format!("swept mass (alpha={alpha}, R={radius}, d={d})"), resolutions, values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanStudy {
    pub resolutions: Vec<usize>,
    /// `max_x U^γ(x) − 1` over the probe points.
    pub max_excess: Vec<f64>,
    pub probe_count: usize,
    /// Each stage improves on the previous one or is below the noise floor.
    pub decreasing: bool,
}

/// Below this excess the Frostman trend counts as converged.
pub const FROSTMAN_NOISE_FLOOR: f64 = 1e-3;

/// Probe points off the sphere: a cubic grid inside `|x| ≤ 0.75R` and a
/// Fibonacci sphere of radius `1.5R`.
fn probes(radius: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let h = 0.25 * radius;
    for i in -3..=3 {
        for j in -3..=3 {
            for k in -3..=3 {
                let p = vec![i as f64 * h, j as f64 * h, k as f64 * h];
                if p.iter().map(|x| x * x).sum::<f64>().sqrt() <= 0.75 * radius + 1e-12 {
                    out.push(p);
                }
            }
        }
    }
    for p in unit_sphere(3, 200).expect("n = 3") {
        out.push(p.into_iter().map(|x| 1.5 * radius * x).collect());
    }
    out
}

pub fn frostman_study(alpha: f64, radius: f64, resolutions: &[usize], tol: f64) -> Result<FrostmanStudy> {
    let probe = probes(radius);
    let max_excess = resolutions
        .par_iter()
        .map(|&m| {
            let inst = Instance::build(&sphere_spec(alpha, radius, m, vec![]))?;
            let cap = capacitary_measure(&inst.kernel, &inst.node_set(), tol)?;
            let mut worst = f64::NEG_INFINITY;
            for x in &probe {
                worst = worst.max(inst.potential_at(&cap.gamma, x)? - 1.0);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let decreasing = max_excess
        .windows(2)
        .all(|w| w[1] < w[0] || w[1] <= FROSTMAN_NOISE_FLOOR);
    Ok(FrostmanStudy {
        resolutions: resolutions.to_vec(),
        max_excess,
        probe_count: probe.len(),
        decreasing,
    })
}
