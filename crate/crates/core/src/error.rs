use thiserror::Error;

/// Errors produced by tensor construction, the decompositions and file I/O.
#[derive(Debug, Error)]
pub enum HopcaError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at offset {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator {name} is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { name: String, min_eig: f64 },

    #[error("operator {name} is not positive semi-definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveSemiDefinite { name: String, min_eig: f64 },

    #[error("operator {0} is not symmetric")]
    NotSymmetric(String),

    #[error("tensor is identically zero")]
    ZeroTensor,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HopcaError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        HopcaError::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        HopcaError::InvalidArgument(msg.into())
    }

    /// True for errors that originate in file access or parsing rather than numerics.
    pub fn is_io(&self) -> bool {
        matches!(self, HopcaError::Io(_) | HopcaError::Csv(_) | HopcaError::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, HopcaError>;
