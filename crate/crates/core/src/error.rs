use thiserror::Error;

use crate::qp::QpSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("kernel matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("kernel entry ({row}, {col}) = {value} is negative or not finite")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    /// The energy principle fails: `witness` is a nonzero vector with
    /// `wᵀKw = energy ≤ 0` (up to round-off).
    #[error("kernel is not strictly positive definite (witness energy {energy:e})")]
    NotPositiveDefinite { witness: Vec<f64>, energy: f64 },

    #[error("invalid support set: {0}")]
    InvalidSupport(String),

    #[error("enumeration oracle limited to k <= {max}, got k = {k}")]
    TooLarge { k: usize, max: usize },

    #[error("solver stopped after {iterations} iterations without meeting tolerance")]
    MaxIterExceeded {
        iterations: usize,
        best: Box<QpSolution>,
    },

    /// A post-hoc optimality certificate failed. `invariant` names the
    /// violated condition.
    #[error("characterization violated: {invariant} (residual {residual:e} > limit {limit:e})")]
    CharacterizationViolated {
        invariant: &'static str,
        residual: f64,
        limit: f64,
    },

    #[error("support sets do not form a strictly nested chain at stage {stage}")]
    NotNested { stage: usize },

    #[error("decreasing chain has empty intersection")]
    EmptyIntersection,

    #[error("points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },

    #[error("charge atom {0} coincides with a node")]
    ChargeOnNode(usize),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal a failed optimality certificate rather
    /// than bad input or a stalled solver.
    pub fn is_characterization(&self) -> bool {
        matches!(self, Error::CharacterizationViolated { .. })
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::MaxIterExceeded { .. })
    }
}
