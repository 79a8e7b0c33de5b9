use thiserror::Error;

/// Errors raised by the design library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameter vector or covariate outside the model's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed design (points, weights or bounds).
    #[error("invalid design: {0}")]
    InvalidDesign(String),

    /// Malformed prior (weights, atoms or grid specification).
    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    /// Error variances outside their admissible range.
    #[error("invalid error specification: {0}")]
    InvalidErrorSpec(String),

    /// A matrix that has to be inverted is (numerically) singular.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// `log det` requested for a matrix with non-positive determinant.
    #[error("non-positive determinant ({0:e})")]
    NonPositiveDeterminant(f64),

    /// No sign change of a root equation was found on the search interval.
    #[error("no root found on ({lo}, {hi})")]
    NoRootFound { lo: f64, hi: f64 },

    /// A criterion needed for a ratio is `-inf`.
    #[error("non-finite criterion: {0}")]
    NonFiniteCriterion(String),

    /// Optimizer configuration rejected.
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    /// Model/method pair without a closed-form criterion.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
