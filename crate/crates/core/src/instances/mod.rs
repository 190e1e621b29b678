//! Riesz and logarithmic instances on point clouds in R^n.
//!
//! Off-diagonal entries are the kernel evaluated at distinct points. The
//! kernels are infinite on the diagonal, so each node `i` gets the finite
//! stand-in `κ(r_i)` with `r_i` half the distance to its nearest neighbour
//! (or a fixed length). Charge atoms become auxiliary nodes appended after
//! the generated ones; the node set A is the index range of generated nodes.

pub mod fixtures;
mod geometry;

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use geometry::{unit_sphere, Geometry, ShellProfile};

use crate::error::{Error, Result};
use crate::gauss::capacitary_measure;
use crate::kernel::KernelMatrix;
use crate::measure::{Field, Measure, SupportSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `|x−y|^{α−n}`, `0 < α < n`.
    Riesz { alpha: f64 },
    /// `−log|x−y|` on the plane, with the geometry shrunk into the disc
    /// `|x| ≤ radius < 1`.
    Logarithmic { radius: f64 },
}

impl KernelSpec {
    fn eval(&self, n: usize, r: f64) -> f64 {
        match *self {
            KernelSpec::Riesz { alpha } => r.powf(alpha - n as f64),
            KernelSpec::Logarithmic { .. } => -r.ln(),
        }
    }

    /// Constant of the maximum principle for the continuum kernel: 1 for
    /// Riesz `α ≤ 2` and the logarithmic kernel, `2^{n−α}` for `α > 2`.
    pub fn ugaheri_h(&self, n: usize) -> f64 {
        match *self {
            KernelSpec::Riesz { alpha } if alpha > 2.0 => 2f64.powf(n as f64 - alpha),
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Regularization {
    #[default]
    NearestNeighborHalf,
    FixedLength { s: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeAtom {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub dimension: usize,
    pub kernel: KernelSpec,
    pub geometry: Geometry,
    #[serde(default)]
    pub regularization: Regularization,
    #[serde(default)]
    pub charges: Vec<ChargeAtom>,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n < 2 {
            return Err(Error::InvalidInstance(format!("dimension must be at least 2, got {n}")));
        }
        match self.kernel {
            KernelSpec::Riesz { alpha } => {
                if !(alpha > 0.0 && alpha < n as f64) {
                    return Err(Error::InvalidInstance(format!("Riesz order must lie in (0, {n}), got {alpha}")));
                }
            }
            KernelSpec::Logarithmic { radius } => {
                if n != 2 {
                    return Err(Error::InvalidInstance("logarithmic kernel needs dimension 2".into()));
                }
                if !(radius > 0.0 && radius < 1.0) {
                    return Err(Error::InvalidInstance(format!("disc radius must lie in (0, 1), got {radius}")));
                }
            }
        }
        if let Regularization::FixedLength { s } = self.regularization {
            if !(s > 0.0) {
                return Err(Error::InvalidInstance(format!("regularization length must be positive, got {s}")));
            }
        }
        for (k, c) in self.charges.iter().enumerate() {
            if c.point.len() != n {
                return Err(Error::InvalidInstance(format!("charge {k} has {} coordinates", c.point.len())));
            }
            if !c.mass.is_finite() {
                return Err(Error::InvalidInstance(format!("charge {k} has non-finite mass")));
            }
        }
        Ok(())
    }

    /// Same instance with its charge masses multiplied by `q`.
    pub fn with_charge_scale(&self, q: f64) -> Self {
        let mut s = self.clone();
        for c in &mut s.charges {
            c.mass *= q;
        }
        s
    }
}

/// A built instance: generated nodes followed by charge atoms.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    /// Node and charge coordinates after any rescaling.
    pub points: Vec<Vec<f64>>,
    pub node_count: usize,
    /// Shell of each generated node (all 0 outside shell unions).
    pub shell: Vec<usize>,
    /// Factor applied to the input geometry (logarithmic instances only).
    pub scale: f64,
    pub kernel: KernelMatrix,
    pub omega: Measure,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl Instance {
    pub fn build(spec: &InstanceSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.dimension;
        let generated = spec.geometry.generate(n)?;
        let node_count = generated.points.len();
        if node_count == 0 {
            return Err(Error::InvalidInstance("geometry produced no nodes".into()));
        }
        let mut points = generated.points;
        points.extend(spec.charges.iter().map(|c| c.point.clone()));

        let scale = match spec.kernel {
            KernelSpec::Logarithmic { radius } => {
                let far = points.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
                if far > radius {
                    radius / far
                } else {
                    1.0
                }
            }
            KernelSpec::Riesz { .. } => 1.0,
        };
        if scale != 1.0 {
            for p in &mut points {
                p.iter_mut().for_each(|x| *x *= scale);
            }
        }

        let total = points.len();
        let dist: Vec<Vec<f64>> = points
            .par_iter()
            .map(|p| points.iter().map(|o| distance(p, o)).collect())
            .collect();
        for i in 0..total {
            for j in 0..i {
                if dist[i][j] == 0.0 {
                    return Err(if j < node_count && i >= node_count {
                        Error::ChargeOnNode(i - node_count)
                    } else {
                        Error::DuplicatePoints { first: j, second: i }
                    });
                }
            }
        }

        // Nodes see only other nodes, so K[A,A] does not depend on the charges.
        let radius = |i: usize| -> f64 {
            match spec.regularization {
                Regularization::FixedLength { s } => s * scale,
                Regularization::NearestNeighborHalf => {
                    let pool = if i < node_count { 0..node_count } else { 0..total };
                    let nearest = pool.filter(|&j| j != i).map(|j| dist[i][j]).fold(f64::INFINITY, f64::min);
                    if nearest.is_finite() {
                        nearest / 2.0
                    } else {
                        // A lone point: unit length (scaled like the geometry).
                        scale
                    }
                }
            }
        };
        let rows: Vec<Vec<f64>> = (0..total)
            .into_par_iter()
            .map(|i| {
                (0..total)
                    .map(|j| {
                        if i == j {
                            spec.kernel.eval(n, radius(i))
                        } else {
                            spec.kernel.eval(n, dist[i][j])
                        }
                    })
                    .collect()
            })
            .collect();
        let kernel = KernelMatrix::new(DMatrix::from_fn(total, total, |i, j| rows[i][j]))?;

        let mut weights = vec![0.0; total];
        for (k, c) in spec.charges.iter().enumerate() {
            weights[node_count + k] = c.mass;
        }
        Ok(Self {
            spec: spec.clone(),
            points,
            node_count,
            shell: generated.shell,
            scale,
            kernel,
            omega: Measure::new(weights),
        })
    }

    /// The node set A: every generated node.
    pub fn node_set(&self) -> SupportSet {
        SupportSet::range(0..self.node_count, self.kernel.size())
            .expect("instances have at least one node")
            .with_label("A")
    }

    /// Nodes of the given shells.
    pub fn shell_set(&self, shells: std::ops::Range<usize>) -> Result<SupportSet> {
        let idx: Vec<usize> = (0..self.node_count).filter(|&i| shells.contains(&self.shell[i])).collect();
        SupportSet::new(idx, self.kernel.size())
    }

    pub fn ugaheri_h(&self) -> f64 {
        self.spec.kernel.ugaheri_h(self.spec.dimension)
    }

    /// Euclidean norm of node `i` in the original (unscaled) coordinates.
    pub fn node_radius(&self, i: usize) -> f64 {
        self.points[i].iter().map(|x| x * x).sum::<f64>().sqrt() / self.scale
    }

    /// Potential at an arbitrary point `x` (original coordinates) of a
    /// measure over the instance universe. `x` must not be a node.
    pub fn potential_at(&self, mu: &Measure, x: &[f64]) -> Result<f64> {
        mu.check_len(self.kernel.size())?;
        let xs: Vec<f64> = x.iter().map(|v| v * self.scale).collect();
        let n = self.spec.dimension;
        let mut u = 0.0;
        for (p, &w) in self.points.iter().zip(mu.weights()) {
            if w != 0.0 {
                let d = distance(p, &xs);
                if d == 0.0 {
                    return Err(Error::InvalidParameter("probe point coincides with a node".into()));
                }
                u += w * self.spec.kernel.eval(n, d);
            }
        }
        Ok(u)
    }

    /// `f = −U^ω` on the full universe, evaluated directly from the charge
    /// atoms (no diagonal entries are involved on the nodes).
    pub fn field(&self) -> Field {
        field_from_charge(self).1
    }

    /// Nodes as CSV, one point per row, with a shell column.
    pub fn write_nodes_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let n = self.spec.dimension;
        let mut header: Vec<String> = (0..n).map(|d| format!("x{d}")).collect();
        header.push("shell".into());
        w.write_record(&header)?;
        for i in 0..self.node_count {
            let mut rec: Vec<String> = self.points[i].iter().map(|v| (v / self.scale).to_string()).collect();
            rec.push(self.shell[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_kernel_matrix(spec: &InstanceSpec) -> Result<KernelMatrix> {
    Ok(Instance::build(spec)?.kernel)
}

/// ω over the instance universe and `f = −U^ω` restricted to the nodes.
pub fn field_from_charge(instance: &Instance) -> (Measure, Field) {
    let n = instance.spec.dimension;
    let values: Vec<f64> = (0..instance.node_count)
        .map(|i| {
            -instance
                .spec
                .charges
                .iter()
                .enumerate()
                .map(|(k, c)| c.mass * instance.spec.kernel.eval(n, distance(&instance.points[i], &instance.points[instance.node_count + k])))
                .sum::<f64>()
        })
        .collect();
    (instance.omega.clone(), Field::direct(values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThinnessVerdict {
    ApparentlyThin,
    ApparentlyNotThin,
}

/// Heuristic test of the Wiener-type series `Σ c(A_j)/q^{j(n−α)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnessReport {
    pub q: f64,
    pub shell_capacities: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Least-squares `β` in `c(A_j) ~ q^{jβ}` over nonempty shells.
    pub growth_exponent: Option<f64>,
    /// `n − α`, the exponent separating the two verdicts.
    pub critical_exponent: f64,
    pub verdict: ThinnessVerdict,
}

/// Fraction of the critical exponent below which the fitted growth counts as
/// summable.
pub const THIN_EXPONENT_FRACTION: f64 = 0.8;

pub fn thinness_series(spec: &InstanceSpec, tol: f64) -> Result<ThinnessReport> {
    let Geometry::ShellUnion { q, j_min, .. } = spec.geometry else {
        return Err(Error::InvalidInstance("thinness series needs a shell_union geometry".into()));
    };
    let KernelSpec::Riesz { alpha } = spec.kernel else {
        return Err(Error::InvalidInstance("thinness series needs a Riesz kernel".into()));
    };
    let inst = Instance::build(spec)?;
    let critical = spec.dimension as f64 - alpha;
    let shells = spec.geometry.shell_count();
    let caps: Vec<f64> = (0..shells)
        .into_par_iter()
        .map(|s| {
            let idx: Vec<usize> = (0..inst.node_count).filter(|&i| inst.shell[i] == s).collect();
            if idx.is_empty() {
                return Ok(0.0);
            }
            let set = SupportSet::new(idx, inst.kernel.size())?;
            Ok(capacitary_measure(&inst.kernel, &set, tol)?.capacity)
        })
        .collect::<Result<_>>()?;

    let mut partial = Vec::with_capacity(shells);
    let mut acc = 0.0;
    for (s, c) in caps.iter().enumerate() {
        let j = j_min + s as i32;
        acc += c / q.powf(j as f64 * critical);
        partial.push(acc);
    }

    let pts: Vec<(f64, f64)> = caps
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .map(|(s, &c)| ((j_min + s as i32) as f64 * q.ln(), c.ln()))
        .collect();
    let growth = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let later_empty = caps.iter().skip(1).all(|&c| c == 0.0);
    let verdict = match growth {
        _ if later_empty => ThinnessVerdict::ApparentlyThin,
        Some(beta) if beta <= THIN_EXPONENT_FRACTION * critical => ThinnessVerdict::ApparentlyThin,
        Some(_) => ThinnessVerdict::ApparentlyNotThin,
        None => ThinnessVerdict::ApparentlyThin,
    };
    Ok(ThinnessReport {
        q,
        shell_capacities: caps,
        partial_sums: partial,
        growth_exponent: growth,
        critical_exponent: critical,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_spec(alpha: f64, m: usize) -> InstanceSpec {
        InstanceSpec {
            dimension: 3,
            kernel: KernelSpec::Riesz { alpha },
            geometry: Geometry::Sphere {
                radius: 1.0,
                m,
                center: None,
            },
            regularization: Regularization::NearestNeighborHalf,
            charges: vec![],
        }
    }

    #[test]
    fn two_point_riesz_entry() {
        let spec = InstanceSpec {
            geometry: Geometry::Segment {
                a: vec![0.0, 0.0, 0.0],
                b: vec![1.0, 0.0, 0.0],
                m: 2,
            },
            ..sphere_spec(1.0, 2)
        };
        let k = build_kernel_matrix(&spec).unwrap();
        assert_eq!(k.get(0, 1), 1.0);
        // r = 1/2, r^{-2} = 4
        assert_eq!(k.get(0, 0), 4.0);
    }

    #[test]
    fn logarithmic_entry_in_disc() {
        let spec = InstanceSpec {
            dimension: 2,
            kernel: KernelSpec::Logarithmic { radius: 0.4 },
            geometry: Geometry::Segment {
                a: vec![-0.1, 0.0],
                b: vec![0.1, 0.0],
                m: 2,
            },
            regularization: Regularization::NearestNeighborHalf,
            charges: vec![],
        };
        let inst = Instance::build(&spec).unwrap();
        assert_eq!(inst.scale, 1.0);
        assert!((inst.kernel.get(0, 1) - 1.609_437_912_434_100_3).abs() < 1e-12);
        assert!((inst.kernel.get(0, 0) + 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sphere_100_is_pd() {
        let k = build_kernel_matrix(&sphere_spec(2.0, 100)).unwrap();
        assert!(k.certificate().min_pivot > 0.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(Instance::build(&sphere_spec(3.0, 10)).is_err());
        let mut s = sphere_spec(1.0, 10);
        let first = geometry::unit_sphere(3, 10).unwrap().remove(0);
        s.charges.push(ChargeAtom { point: first, mass: 1.0 });
        assert!(matches!(Instance::build(&s), Err(Error::ChargeOnNode(0))));
        let dup = InstanceSpec {
            geometry: Geometry::Segment {
                a: vec![0.0; 3],
                b: vec![0.0; 3],
                m: 2,
            },
            ..sphere_spec(1.0, 2)
        };
        assert!(matches!(Instance::build(&dup), Err(Error::DuplicatePoints { .. })));
    }

    #[test]
    fn field_sign_and_superposition() {
        let mut s = sphere_spec(2.0, 30);
        assert!(field_from_charge(&Instance::build(&s).unwrap()).1.values().iter().all(|&v| v == 0.0));
        s.charges = vec![
            ChargeAtom { point: vec![2.0, 0.0, 0.0], mass: 1.0 },
            ChargeAtom { point: vec![0.0, -3.0, 0.5], mass: -0.4 },
        ];
        let inst = Instance::build(&s).unwrap();
        let f = inst.field();
        for i in 0..inst.node_count {
            let mut oracle = 0.0;
            for c in &s.charges {
                let d: f64 = inst.points[i].iter().zip(&c.point).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                oracle -= c.mass / d;
            }
            assert!((f.values()[i] - oracle).abs() < 1e-12);
        }
        // The kernel route agrees on the nodes.
        let from_kernel = Field::from_charge(&inst.kernel, &inst.omega).unwrap();
        for i in 0..inst.node_count {
            assert!((from_kernel.values()[i] - f.values()[i]).abs() < 1e-12);
        }
        let single = Instance::build(&InstanceSpec { charges: vec![s.charges[0].clone()], ..s.clone() }).unwrap();
        assert!(single.field().values().iter().all(|&v| v < 0.0));
    }

    #[test]
    fn nodes_csv_has_header_and_rows() {
        let inst = Instance::build(&sphere_spec(1.0, 5)).unwrap();
        let mut buf = Vec::new();
        inst.write_nodes_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("x0,x1,x2,shell"));
    }
}
