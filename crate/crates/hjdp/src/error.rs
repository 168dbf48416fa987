//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by grid construction, solvers, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid specification violated its invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An operation was called with arguments outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A problem configuration failed validation; `path` names the offending key.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Two fields with incompatible shapes were combined.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The numerical solve failed (NaN, divergence, or non-convergence treated as fatal).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A field container file is malformed or of an unsupported version.
    #[error("bad field container: {0}")]
    Container(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: 1 for validation
    /// problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
