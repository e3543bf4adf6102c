use thiserror::Error;

/// Errors raised by geometry, sampling and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StitError {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("hyperplane does not cross the interior of the body")]
    NoSplit,
    #[error("cell has zero volume")]
    DegenerateCell,
    #[error("direction sampling failed after {proposals} proposals")]
    SamplingFailure { proposals: usize },
    #[error("non-finite cutting rate {0}")]
    NonFiniteRate(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("point lies outside the window")]
    OutOfWindow,
    #[error("cell reference does not address a leaf")]
    InvalidPath,
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("estimator needs at least one data point")]
    EmptyData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T, E = StitError> = std::result::Result<T, E>;
