use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image {}: {reason}", path.display())]
    CorruptImage { path: PathBuf, reason: String },

    #[error("expected {expected} channel(s), got {actual}")]
    ChannelCount { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image is {width}x{height}, smaller than the {size}x{size} patch")]
    ImageTooSmall { width: usize, height: usize, size: usize },

    #[error("patches do not cover pixel ({x}, {y})")]
    IncompleteCover { x: usize, y: usize },

    #[error("linear solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverDidNotConverge { iterations: usize, residual: f64 },

    #[error("{}:{line}: {reason}", path.display())]
    Config { path: PathBuf, line: usize, reason: String },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step { step, source: Box::new(self) }
    }
}
