use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum TrtError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("non-finite value detected after step {step}")]
    NonFinite { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TrtError>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> TrtError {
    TrtError::InvalidArgument(msg.into())
}
