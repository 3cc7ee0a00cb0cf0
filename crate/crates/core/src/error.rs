use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("factorization mismatch: {0:?} vs {1:?}")]
    FactorizationMismatch(Vec<usize>, Vec<usize>),

    #[error("invalid factor index {index} for factorization with {count} factors")]
    InvalidFactor { index: usize, count: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("algebra is not commutative (max commutator norm {norm:e})")]
    NotCommutative { norm: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
