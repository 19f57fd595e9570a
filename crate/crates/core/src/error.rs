use thiserror::Error;

/// Errors raised by norm evaluation, construction and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative coordinate {value} at index {index}")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },
    #[error("gradient is undefined at the origin")]
    GradientAtOrigin,
    #[error("flat region: every coordinate sits where G' vanishes, gamma(x) = 0")]
    FlatRegion,
    #[error("not an Orlicz function: {0}")]
    NotOrlicz(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exponent {p} is below the required minimum {required}")]
    ExponentTooSmall { p: f64, required: f64 },
    #[error("norm is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
