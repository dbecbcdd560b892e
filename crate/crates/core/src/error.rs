use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tensor space needs at least one factor")]
    EmptySpace,

    #[error("factor dimension {0} is invalid (each factor must be >= 2)")]
    InvalidFactorDim(usize),

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid factor index {index} for a space with {factors} factors")]
    InvalidFactorIndex { index: usize, factors: usize },

    #[error("factor selection is empty")]
    EmptySelection,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
