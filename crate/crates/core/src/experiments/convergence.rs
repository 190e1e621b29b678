//! Pseudo-balayage along nested chains of node sets.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{max_increase, Checked, InvariantCheck};
use crate::balayage::{pseudo_balayage, BalayageResult};
use crate::energy::{energy, strong_distance};
use crate::error::{Error, Result};
use crate::gauss::{check_increasing, solve_gauss};
use crate::kernel::KernelMatrix;
use crate::measure::{Measure, SupportSet};
use crate::tolerances::CERTIFICATE_FACTOR;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub direction: Direction,
    pub stage_sizes: Vec<usize>,
    /// `‖ω̂^{K_j} − ω̂^A‖` with A the limit set of the chain.
    pub stage_norms: Vec<f64>,
    /// `ŵ_f(K_j)`.
    pub stage_values: Vec<f64>,
    pub stage_masses: Vec<f64>,
    /// `2I_f(ω̂^K) − 2I_f(ω̂^{K′}) − ‖ω̂^K − ω̂^{K′}‖²` for each adjacent pair
    /// `K ⊂ K′`, in chain order.
    pub fund_slack: Vec<f64>,
    /// `w_f(K_j)`, the Gauss values along the chain.
    pub gauss_values: Vec<f64>,
    pub checks: Vec<InvariantCheck>,
}

impl Checked for ConvergenceReport {
    fn checks(&self) -> &[InvariantCheck] {
        &self.checks
    }
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["stage", "size", "value", "mass", "distance", "fund_slack", "gauss_value"])?;
        for j in 0..self.stage_sizes.len() {
            w.write_record([
                j.to_string(),
                self.stage_sizes[j].to_string(),
                self.stage_values[j].to_string(),
                self.stage_masses[j].to_string(),
                self.stage_norms[j].to_string(),
                self.fund_slack.get(j).map(|v| v.to_string()).unwrap_or_default(),
                self.gauss_values[j].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn solve_stages(kernel: &KernelMatrix, omega: &Measure, chain: &[SupportSet], tol: f64) -> Result<Vec<(BalayageResult, f64)>> {
    chain
        .par_iter()
        .map(|set| {
            let hat = pseudo_balayage(kernel, omega, set, tol)?;
            let gauss = solve_gauss(kernel, omega, set, tol)?.value;
            Ok((hat, gauss))
        })
        .collect()
}

/// `chain` is listed in increasing order of the sets.
fn report(
    kernel: &KernelMatrix,
    direction: Direction,
    chain: &[SupportSet],
    stages: Vec<(BalayageResult, f64)>,
    limit_index: usize,
    tol: f64,
) -> Result<ConvergenceReport> {
    let limit = &stages[limit_index].0.measure;
    let mut norms = Vec::with_capacity(stages.len());
    for (hat, _) in &stages {
        norms.push(strong_distance(kernel, &hat.measure, limit)?);
    }
    let mut fund = Vec::with_capacity(stages.len().saturating_sub(1));
    for pair in stages.windows(2) {
        // Increasing order in `stages` when Up; reversed when Down.
        let (small, large) = match direction {
            Direction::Up => (&pair[0].0, &pair[1].0),
            Direction::Down => (&pair[1].0, &pair[0].0),
        };
        let d2 = energy(kernel, &small.measure.sub(&large.measure))?;
        fund.push(2.0 * small.value - 2.0 * large.value - d2);
    }
    let values: Vec<f64> = stages.iter().map(|s| s.0.value).collect();
    let gauss: Vec<f64> = stages.iter().map(|s| s.1).collect();
    let arithmetic = CERTIFICATE_FACTOR * tol;
    let (value_trend, gauss_trend) = match direction {
        Direction::Up => (max_increase(&values), max_increase(&gauss)),
        Direction::Down => {
            let neg = |a: &[f64]| a.iter().map(|v| -v).collect::<Vec<_>>();
            (max_increase(&neg(&values)), max_increase(&neg(&gauss)))
        }
    };
    let checks = vec![
        InvariantCheck::at_most(
            "fund: ‖ω̂^K − ω̂^K′‖² ≤ 2I_f(ω̂^K) − 2I_f(ω̂^K′)",
            fund.iter().map(|s| -s).fold(0.0, f64::max),
            tol,
        ),
        InvariantCheck::at_most("final stage distance to ω̂^A", norms[norms.len() - 1], tol),
        InvariantCheck::at_most(
            match direction {
                Direction::Up => "ŵ_f(K_j) nonincreasing",
                Direction::Down => "ŵ_f(A_j) nondecreasing",
            },
            value_trend,
            arithmetic,
        ),
        InvariantCheck::at_most(
            match direction {
                Direction::Up => "w_f(K_j) nonincreasing",
                Direction::Down => "w_f(A_j) nondecreasing",
            },
            gauss_trend,
            arithmetic,
        ),
    ];
    Ok(ConvergenceReport {
        direction,
        stage_sizes: chain.iter().map(|s| s.len()).collect(),
        stage_norms: norms,
        stage_values: values,
        stage_masses: stages.iter().map(|s| s.0.mass).collect(),
        fund_slack: fund,
        gauss_values: gauss,
        checks,
    })
}

/// Increasing chain `K_1 ⊂ … ⊂ K_p = A`.
pub fn monotone_up(kernel: &KernelMatrix, omega: &Measure, chain: &[SupportSet], tol: f64) -> Result<ConvergenceReport> {
    if chain.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    check_increasing(chain)?;
    let stages = solve_stages(kernel, omega, chain, tol)?;
    report(kernel, Direction::Up, chain, stages, chain.len() - 1, tol)
}

/// Decreasing chain `A_1 ⊃ … ⊃ A_p`; the limit is the intersection.
pub fn monotone_down(kernel: &KernelMatrix, omega: &Measure, chain: &[SupportSet], tol: f64) -> Result<ConvergenceReport> {
    if chain.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    let common: Vec<usize> = chain[0]
        .indices()
        .iter()
        .copied()
        .filter(|&i| chain.iter().all(|s| s.contains(i)))
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let mut reversed: Vec<SupportSet> = chain.to_vec();
    reversed.reverse();
    check_increasing(&reversed).map_err(|e| match e {
        Error::NotNested { stage } => Error::NotNested { stage: chain.len() - stage },
        other => other,
    })?;
    let stages = solve_stages(kernel, omega, chain, tol)?;
    report(kernel, Direction::Down, chain, stages, chain.len() - 1, tol)
}
