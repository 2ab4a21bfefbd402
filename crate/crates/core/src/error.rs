use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("measure space must contain at least one point")]
    EmptySpace,

    #[error("mass at index {index} is not strictly positive")]
    NonPositiveMass { index: usize },

    #[error("weight at index {index} is negative")]
    NegativeWeight { index: usize },

    #[error("map sends index {index} to {target}, outside the window of {len} points")]
    OutsideWindow { index: usize, target: usize, len: usize },

    #[error("starting vector must be nonzero")]
    ZeroVector,

    #[error("operator is not {lambda}-hyponormal (minimal lambda is {minimal})")]
    NotLambdaHyponormal { lambda: f64, minimal: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("quadrature did not resolve: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
