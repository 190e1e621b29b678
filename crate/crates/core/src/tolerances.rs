//! Default tolerances.
//!
//! The continuous statements are exact; every threshold below is numerical.

/// Arithmetic agreement for quantities computed by two exact routes.
pub const ARITHMETIC: f64 = 1e-10;

/// Default KKT tolerance for the cone and simplex solvers.
pub const SOLVER_KKT: f64 = 1e-8;

/// A weight is treated as active (zero) iff it is at most this multiple of
/// the solver tolerance.
pub const ACTIVE_FACTOR: f64 = 10.0;

/// Post-hoc certificates fail when a residual exceeds this multiple of the
/// requested tolerance.
pub const CERTIFICATE_FACTOR: f64 = 10.0;

/// Relative slack for mass bounds on regularized Riesz matrices, whose
/// maximum principles hold only up to discretization error.
pub const DISCRETIZATION_SLACK: f64 = 0.02;

/// Largest subset size the enumeration oracles accept.
pub const ORACLE_MAX_K: usize = 14;
