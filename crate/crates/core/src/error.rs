use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("strategy {index} has norm {norm}, expected a unit vector")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("operation requires tau > 0 (hardmax utilities are not differentiable)")]
    HardmaxUnsupported,

    #[error("mean consumer embedding is zero; the collapse direction is undefined")]
    UndefinedMeanDirection,

    #[error("parameter vector {index} has vanishing norm")]
    ParameterUnderflow { index: usize },

    #[error("unsupported dimension {d} for {context}")]
    UnsupportedDimension { d: usize, context: &'static str },

    #[error("grid of {size} points exceeds the cap of {cap}")]
    GridOverflow { size: u128, cap: u128 },

    #[error("linear program: {0}")]
    LinearProgram(String),

    #[error("root bracketing failed: {0}")]
    NoSignChange(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("negative rating {rating} at triple {index} (non-negative factorization requires ratings >= 0)")]
    NegativeRating { index: usize, rating: f64 },

    #[error("group {0:?} has no members")]
    EmptyGroup(String),

    #[error("neighborhood size {k} exceeds the {available} available baseline items")]
    NeighborhoodTooLarge { k: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
