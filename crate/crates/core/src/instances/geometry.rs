//! Deterministic point generators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How shell `j` of a shell union is drawn inside `{q^j ≤ |x| < q^{j+1}}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellProfile {
    /// Full sphere of radius `q^j(1+q)/2` about the origin.
    Full,
    /// Small sphere of radius `(q−1)/4·q^{j/2}` centred at `(1+q)/2·q^j e_1`,
    /// so its capacity grows only like the square root of a full shell's.
    Shrinking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    Sphere {
        radius: f64,
        m: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Ball {
        radius: f64,
        m: usize,
    },
    Segment {
        a: Vec<f64>,
        b: Vec<f64>,
        m: usize,
    },
    Annulus {
        inner: f64,
        outer: f64,
        m: usize,
    },
    ShellUnion {
        q: f64,
        j_min: i32,
        j_max: i32,
        /// Nodes per shell; a single entry applies to every shell.
        per_shell: Vec<usize>,
        #[serde(default = "default_profile")]
        profile: ShellProfile,
    },
}

fn default_profile() -> ShellProfile {
    ShellProfile::Full
}

/// Generated nodes with the shell each belongs to (0 outside shell unions).
pub(crate) struct Points {
    pub points: Vec<Vec<f64>>,
    pub shell: Vec<usize>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(format!("{name} must be positive, got {v}")))
    }
}

fn low_dim(n: usize, what: &str) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InvalidInstance(format!("{what} sampling needs dimension 2 or 3, got {n}")))
    }
}

/// `m` near-uniform unit vectors: the Fibonacci lattice for `n = 3`,
/// equally spaced angles for `n = 2`.
pub fn unit_sphere(n: usize, m: usize) -> Result<Vec<Vec<f64>>> {
    low_dim(n, "sphere")?;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    Ok((0..m)
        .map(|i| {
            if n == 2 {
                let t = std::f64::consts::TAU * i as f64 / m as f64;
                vec![t.cos(), t.sin()]
            } else {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                vec![r * t.cos(), r * t.sin(), z]
            }
        })
        .collect())
}

/// Radially stratified shells between `r0` and `r1`, with counts
/// proportional to `r^{n−1}` at the layer midpoints.
fn stratified(n: usize, r0: f64, r1: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    low_dim(n, "ball")?;
    let layers = ((m as f64).powf(1.0 / n as f64).round() as usize).max(1);
    let radii: Vec<f64> = (0..layers)
        .map(|l| r0 + (r1 - r0) * (l as f64 + 0.5) / layers as f64)
        .collect();
    let weight: Vec<f64> = radii.iter().map(|r| r.powi(n as i32 - 1)).collect();
    let total: f64 = weight.iter().sum();
    // Largest-remainder apportionment of m over the layers.
    let raw: Vec<f64> = weight.iter().map(|w| w / total * m as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..layers).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())));
    let short = m - counts.iter().sum::<usize>();
    for &l in order.iter().take(short) {
        counts[l] += 1;
    }
    let mut out = Vec::with_capacity(m);
    for (l, (&r, &c)) in radii.iter().zip(&counts).enumerate() {
        for mut p in unit_sphere(n, c)? {
            if n == 2 {
                // Stagger neighbouring rings.
                let t = std::f64::consts::PI * l as f64 / c.max(1) as f64;
                let (s, co) = t.sin_cos();
                p = vec![p[0] * co - p[1] * s, p[0] * s + p[1] * co];
            }
            out.push(p.into_iter().map(|x| x * r).collect());
        }
    }
    Ok(out)
}

impl Geometry {
    pub(crate) fn generate(&self, n: usize) -> Result<Points> {
        let single = |points: Vec<Vec<f64>>| Points {
            shell: vec![0; points.len()],
            points,
        };
        match self {
            Geometry::Sphere { radius, m, center } => {
                positive("radius", *radius)?;
                let c = match center {
                    Some(c) if c.len() != n => {
                        return Err(Error::InvalidInstance(format!(
                            "sphere center has {} coordinates in dimension {n}",
                            c.len()
                        )))
                    }
                    Some(c) => c.clone(),
                    None => vec![0.0; n],
                };
                let pts = unit_sphere(n, *m)?
                    .into_iter()
                    .map(|p| p.iter().zip(&c).map(|(x, y)| y + radius * x).collect())
                    .collect();
                Ok(single(pts))
            }
            Geometry::Ball { radius, m } => {
                positive("radius", *radius)?;
                Ok(single(stratified(n, 0.0, *radius, *m)?))
            }
            Geometry::Annulus { inner, outer, m } => {
                positive("inner radius", *inner)?;
                if !(outer > inner) {
                    return Err(Error::InvalidInstance("annulus needs outer > inner".into()));
                }
                Ok(single(stratified(n, *inner, *outer, *m)?))
            }
            Geometry::Segment { a, b, m } => {
                if a.len() != n || b.len() != n {
                    return Err(Error::InvalidInstance("segment endpoints must have n coordinates".into()));
                }
                let pts = (0..*m)
                    .map(|i| {
                        let t = if *m == 1 { 0.5 } else { i as f64 / (*m - 1) as f64 };
                        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
                    })
                    .collect();
                Ok(single(pts))
            }
            Geometry::ShellUnion {
                q,
                j_min,
                j_max,
                per_shell,
                profile,
            } => {
                if !(*q > 1.0) {
                    return Err(Error::InvalidInstance(format!("shell ratio q must exceed 1, got {q}")));
                }
                if j_max < j_min {
                    return Err(Error::InvalidInstance("shell range is empty".into()));
                }
                let shells = (j_max - j_min + 1) as usize;
                if per_shell.len() != 1 && per_shell.len() != shells {
                    return Err(Error::InvalidInstance(format!(
                        "per_shell lists {} counts for {shells} shells",
                        per_shell.len()
                    )));
                }
                let mut out = Points {
                    points: Vec::new(),
                    shell: Vec::new(),
                };
                for (s, j) in (*j_min..=*j_max).enumerate() {
                    let count = per_shell[if per_shell.len() == 1 { 0 } else { s }];
                    let qj = q.powi(j);
                    let (radius, center) = match profile {
                        ShellProfile::Full => (qj * (1.0 + q) / 2.0, vec![0.0; n]),
                        ShellProfile::Shrinking => {
                            let mut c = vec![0.0; n];
                            c[0] = (1.0 + q) / 2.0 * qj;
                            ((q - 1.0) / 4.0 * q.powf(j as f64 / 2.0), c)
                        }
                    };
                    for p in unit_sphere(n, count)? {
                        out.points.push(p.iter().zip(&center).map(|(x, c)| c + radius * x).collect());
                        out.shell.push(s);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn shell_count(&self) -> usize {
        match self {
            Geometry::ShellUnion { j_min, j_max, .. } => (j_max - j_min + 1).max(0) as usize,
            _ => 1,
        }
    }
}
