use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The argument sits on the pole of ζ(1+s).
    #[error("pole of zeta(1+s) at s = 0")]
    Pole,

    /// Coincident offsets or a zero separation where the formula is singular.
    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("configuration mismatch: {0}")]
    Configuration(String),

    /// Tensor quadrature over too many primes or a determinant that is too large.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty window: {0}")]
    EmptyWindow(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
