//! Gauss problem behaviour along growing truncations of an unbounded set.
//!
//! A finite truncation always has a Gauss solution λ. On a family standing
//! in for a set of infinite capacity, the continuum problem fails exactly
//! when `ω̂^A(X) < 1`; the truncations then show the missing mass
//! `1 − ω̂^A(X)` of λ drifting to the outermost nodes.
//!
//! Signature used here, per truncation: the deficit `1 − ω̂^A(X)` exceeds
//! the discretization slack and the λ-mass on the outermost
//! [`OUTER_NODE_FRACTION`] of nodes is at least [`LEAK_SHARE`] of that
//! deficit. A row leaks when the signature holds at the last two
//! truncations, and is stable when λ keeps at least half its mass on the
//! interior nodes there.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use super::{Checked, InvariantCheck};
use crate::balayage::pseudo_balayage;
use crate::energy::strong_distance;
use crate::error::{Error, Result};
use crate::gauss::solve_gauss;
use crate::instances::{Instance, InstanceSpec};
use crate::tolerances::DISCRETIZATION_SLACK;

/// Share of nodes, by distance from the origin, counted as outer.
pub const OUTER_NODE_FRACTION: f64 = 0.2;
/// Share of the deficit that must sit on the outer nodes to count as leakage.
pub const LEAK_SHARE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    /// Multipliers `q` applied to the charge.
    pub scalings: Vec<f64>,
    /// Adds a row whose multiplier is `1/ω̂^A(X)` at each truncation.
    pub unit_mass_row: bool,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            scalings: vec![0.0, 0.5, 0.75, 1.0, 1.5],
            unit_mass_row: true,
            tol: crate::tolerances::SOLVER_KKT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub nodes: usize,
    pub multiplier: f64,
    pub balayage_mass: f64,
    pub gauss_value: f64,
    pub balayage_value: f64,
    /// λ-mass on the outermost nodes.
    pub outer_fraction: f64,
    pub interior_fraction: f64,
    /// `max(0, 1 − ω̂^A(X))`.
    pub deficit: f64,
    pub leaking: bool,
    /// Set when `ω̂^A(X) = 1` within 1e−9 and λ coincides with ω̂^A.
    pub lambda_is_balayage: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSignature {
    Stable,
    Leaking,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// `None` for the unit-mass row.
    pub scaling: Option<f64>,
    /// `q·ω⁺(X)` (of the largest truncation for the unit-mass row).
    pub positive_mass: f64,
    pub cells: Vec<ScanCell>,
    pub signature: RowSignature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityTable {
    pub rows: Vec<ScanRow>,
    pub checks: Vec<InvariantCheck>,
}

impl Checked for SolvabilityTable {
    fn checks(&self) -> &[InvariantCheck] {
        &self.checks
    }
}

impl SolvabilityTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "scaling",
            "nodes",
            "multiplier",
            "balayage_mass",
            "balayage_value",
            "gauss_value",
            "outer_fraction",
            "leaking",
            "lambda_is_balayage",
            "signature",
        ])?;
        for row in &self.rows {
            for c in &row.cells {
                w.write_record([
                    row.scaling.map(|q| q.to_string()).unwrap_or_else(|| "unit_mass".into()),
                    c.nodes.to_string(),
                    c.multiplier.to_string(),
                    c.balayage_mass.to_string(),
                    c.balayage_value.to_string(),
                    c.gauss_value.to_string(),
                    c.outer_fraction.to_string(),
                    c.leaking.to_string(),
                    c.lambda_is_balayage.to_string(),
                    format!("{:?}", row.signature),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct Truncation {
    inst: Instance,
    outer: Vec<usize>,
}

fn truncation(spec: &InstanceSpec) -> Result<Truncation> {
    let inst = Instance::build(spec)?;
    let mut order: Vec<usize> = (0..inst.node_count).collect();
    order.sort_by(|&a, &b| inst.node_radius(b).total_cmp(&inst.node_radius(a)).then(a.cmp(&b)));
    let count = ((inst.node_count as f64) * OUTER_NODE_FRACTION).ceil() as usize;
    order.truncate(count.max(1));
    Ok(Truncation { inst, outer: order })
}

fn cell(t: &Truncation, multiplier: f64, tol: f64) -> Result<ScanCell> {
    let inst = &t.inst;
    let a = inst.node_set();
    let omega = inst.omega.scaled(multiplier);
    let hat = pseudo_balayage(&inst.kernel, &omega, &a, tol)?;
    let g = solve_gauss(&inst.kernel, &omega, &a, tol)?;
    let outer: f64 = t.outer.iter().map(|&i| g.measure.weights()[i]).sum();
    let deficit = (1.0 - hat.mass).max(0.0);
    let lambda_is_balayage =
        (hat.mass - 1.0).abs() <= 1e-9 && strong_distance(&inst.kernel, &g.measure, &hat.measure)? <= 1e-7;
    Ok(ScanCell {
        nodes: inst.node_count,
        multiplier,
        balayage_mass: hat.mass,
        gauss_value: g.value,
        balayage_value: hat.value,
        outer_fraction: outer,
        interior_fraction: 1.0 - outer,
        deficit,
        leaking: deficit > DISCRETIZATION_SLACK && outer >= LEAK_SHARE * deficit,
        lambda_is_balayage,
    })
}

fn signature(cells: &[ScanCell]) -> RowSignature {
    let tail = &cells[cells.len().saturating_sub(2)..];
    if tail.len() == 2 && tail.iter().all(|c| c.leaking) {
        RowSignature::Leaking
    } else if tail.len() == 2 && tail.iter().all(|c| !c.leaking && c.interior_fraction >= 0.5) {
        RowSignature::Stable
    } else {
        RowSignature::Inconclusive
    }
}

/// Runs every scaling on every truncation of `family` (listed from the
/// smallest truncation up). The charge must be positive.
pub fn solvability_scan(family: &[InstanceSpec], opts: &ScanOptions) -> Result<SolvabilityTable> {
    if family.len() < 2 {
        return Err(Error::InvalidParameter("solvability scan needs at least two truncations".into()));
    }
    let truncs = family.par_iter().map(truncation).collect::<Result<Vec<_>>>()?;
    for (j, t) in truncs.iter().enumerate() {
        if !t.inst.omega.is_positive() {
            return Err(Error::InvalidInstance(format!("truncation {j}: scan charges must be positive")));
        }
        if j > 0 && t.inst.node_count <= truncs[j - 1].inst.node_count {
            return Err(Error::NotNested { stage: j });
        }
    }
    let base_mass = |t: &Truncation| t.inst.omega.total_mass();

    let mut jobs: Vec<(usize, usize, Option<f64>)> = Vec::new();
    let rows_count = opts.scalings.len() + usize::from(opts.unit_mass_row);
    for r in 0..rows_count {
        for t in 0..truncs.len() {
            jobs.push((r, t, opts.scalings.get(r).copied()));
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(_, t, q)| {
            let q = match q {
                Some(q) => q,
                None => {
                    let m = pseudo_balayage(&truncs[t].inst.kernel, &truncs[t].inst.omega, &truncs[t].inst.node_set(), opts.tol)?.mass;
                    if m <= 0.0 {
                        return Err(Error::InvalidInstance("charge sweeps to zero mass; no unit-mass scaling".into()));
                    }
                    1.0 / m
                }
            };
            cell(&truncs[t], q, opts.tol)
        })
        .collect::<Result<Vec<ScanCell>>>()?;

    let last = truncs.last().expect("at least two truncations");
    let mut rows = Vec::with_capacity(rows_count);
    for (r, chunk) in cells.chunks(truncs.len()).enumerate() {
        let scaling = opts.scalings.get(r).copied();
        let q = scaling.unwrap_or(chunk[chunk.len() - 1].multiplier);
        rows.push(ScanRow {
            scaling,
            positive_mass: q * base_mass(last),
            signature: signature(chunk),
            cells: chunk.to_vec(),
        });
    }

    let wrong = |pred: &dyn Fn(&ScanRow) -> bool, want: RowSignature| {
        rows.iter().filter(|r| pred(r) && r.signature != want).count() as f64
    };
    let checks = vec![
        InvariantCheck::at_most(
            "rows with ω(X) ≥ 1 stabilize",
            wrong(&|r| r.positive_mass >= 1.0, RowSignature::Stable),
            0.0,
        ),
        InvariantCheck::at_most(
            "rows with ω⁺(X) < 1 leak",
            wrong(&|r| r.scaling.is_some() && r.positive_mass < 1.0, RowSignature::Leaking),
            0.0,
        ),
        InvariantCheck::at_most(
            "unit-mass row: λ = ω̂^A",
            rows.iter()
                .filter(|r| r.scaling.is_none())
                .flat_map(|r| &r.cells)
                .filter(|c| !c.lambda_is_balayage)
                .count() as f64,
            0.0,
        ),
    ];
    Ok(SolvabilityTable { rows, checks })
}
