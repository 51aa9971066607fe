use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation
    /// (fractional order outside (1, 2), angle outside [-π, π], ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Quadrature failed to settle before the sample cap. Carries the last
    /// two coefficient estimates.
    #[error(
        "quadrature did not reach accuracy {target:e} (successive estimates differ by {diff:e})"
    )]
    Accuracy {
        target: f64,
        diff: f64,
        last: Vec<f64>,
        previous: Vec<f64>,
    },

    #[error("size {size} exceeds the dense cap {cap}")]
    Resource { size: usize, cap: usize },

    #[error("singular preconditioner: eigenvalue {value:e} at index {index}")]
    SingularPreconditioner { index: usize, value: f64 },

    #[error("not positive definite: {0}")]
    Definiteness(String),

    #[error("numerical breakdown: {0}")]
    Breakdown(String),
}

impl Error {
    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
