//! Finite-dimensional potential theory for strictly positive definite kernels.
//!
//! The node universe is a finite set with the discrete topology. A kernel is a
//! symmetric, nonnegative, strictly positive definite matrix; measures are
//! signed weight vectors over nodes. On top of this the crate provides
//!
//! - the inner pseudo-balayage of a signed measure onto a node subset
//!   ([`balayage`]), i.e. the minimizer of the Gauss functional over positive
//!   measures carried by the subset;
//! - the Gauss variational problem over unit-mass measures, equilibrium
//!   constants, capacitary measures and solvability diagnostics ([`gauss`]);
//! - Riesz and logarithmic instance generators on point clouds in R^n
//!   ([`instances`]);
//! - scripted convergence and solvability experiments ([`experiments`]).
//!
//! Every "nearly everywhere" statement of the continuous theory collapses to
//! "at every node" here, and vague convergence collapses to componentwise
//! convergence; strong (energy-norm) convergence is the only notion used.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod balayage;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod gauss;
pub mod instances;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod qp;
pub mod tolerances;

pub use balayage::{pseudo_balayage, BalayageResult};
pub use energy::{
    energy, gauss_functional, mutual_energy, potential, strong_distance, weighted_potential,
};
pub use error::{Error, Result};
pub use gauss::{capacitary_measure, solve_gauss, CapacityResult, GaussResult};
pub use kernel::{check_energy_principle, KernelMatrix, PdCertificate};
pub use measure::{Field, FieldOrigin, Measure, SupportSet};
pub use qp::{ConeQpProblem, KktReport, QpSolution, SimplexQpProblem, SolveOptions};
