use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    EigFailure { sweeps: usize },

    #[error("{function}: eigenvalue {value} outside domain {domain}")]
    Domain {
        function: String,
        value: f64,
        domain: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{failed} of {total} bootstrap chains left the domain of {function}")]
    ChainFailures {
        function: String,
        failed: usize,
        total: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
