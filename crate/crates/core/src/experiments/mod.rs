//! Scripted verifications with machine-readable reports.
//!
//! Every experiment returns a serializable report that carries its own
//! invariant checks, so callers can print a pass/fail line per invariant.
//! Independent cells run in parallel; results are collected in input order,
//! so identical inputs give identical reports.

mod convergence;
mod refinement;
mod solvability;
mod ugaheri;

use serde::{Deserialize, Serialize};

pub use convergence::{monotone_down, monotone_up, ConvergenceReport, Direction};
pub use refinement::{
    aitken_limit, frostman_study, sphere_capacity_study, swept_mass_study, FrostmanStudy, RefinementStudy,
};
pub use solvability::{
    solvability_scan, RowSignature, ScanCell, ScanOptions, ScanRow, SolvabilityTable, OUTER_NODE_FRACTION,
};
pub use ugaheri::{ugaheri_estimate, UgaheriEstimate, UgaheriWitness};

/// One named invariant with its worst observed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// Worst residual found (sign convention per invariant).
    pub worst: f64,
    pub limit: f64,
}

impl InvariantCheck {
    /// Passes iff `worst <= limit`.
    pub fn at_most(name: &str, worst: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: worst <= limit,
            worst,
            limit,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {} (worst {:.3e}, limit {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.limit
        )
    }
}

/// Reports that expose invariant checks.
pub trait Checked {
    fn checks(&self) -> &[InvariantCheck];

    fn all_passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    fn first_failure(&self) -> Option<&InvariantCheck> {
        self.checks().iter().find(|c| !c.passed)
    }
}

/// Largest `a[j+1] − a[j]` (positive when the sequence fails to be
/// nonincreasing).
pub(crate) fn max_increase(a: &[f64]) -> f64 {
    a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}
