use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration too large: {predicted} family members exceed the cap of {cap}")]
    EnumerationTooLarge { predicted: u128, cap: usize },

    #[error("decomposition stalled after {pieces} pieces: no family member removes any of the residual")]
    DecompositionStalled { pieces: usize },

    #[error("unsupported norm for {operation}: {norm}")]
    UnsupportedNorm {
        operation: &'static str,
        norm: String,
    },

    #[error("unsupported norm pair for analytic constants: {0}")]
    UnsupportedPair(String),

    #[error("not testable: {0}")]
    NotTestable(String),

    #[error("not compressible: {0}")]
    NotCompressible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(invalid(format!(
            "{what}: dimension mismatch (expected {expected}, got {got})"
        )));
    }
    Ok(())
}
