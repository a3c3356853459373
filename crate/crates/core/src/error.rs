use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A float-mode zero test produced invariants that no real tensor can have.
    /// Re-running the computation on rational input settles it.
    #[error("numerical tolerance failure: {0} (retry in exact mode)")]
    Tolerance(String),

    /// Exact reduction needs a square root that is irrational.
    #[error("no rational witness exists: {0}")]
    NoRationalWitness(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("value outside the divergence domain: {0}")]
    OutsideDomain(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(TensorError::Dimension(msg.into()))
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(TensorError::InvalidArgument(msg.into()))
}
