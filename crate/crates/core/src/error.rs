use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("sample `{0}` is not listed in the panel")]
    SampleNotInPanel(String),

    #[error("population `{0}` has no region assignment")]
    UnknownPopulation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at layer {layer}")]
    NonFinite { layer: usize },

    #[error("training diverged at epoch {epoch}")]
    Diverged {
        epoch: usize,
        /// Epochs completed before the failure.
        history: Box<crate::diet::History>,
    },

    #[error("embedding provenance {found} does not match training split {expected}")]
    Provenance { expected: String, found: String },

    #[error("fold {fold} failed: {cause}")]
    FoldFailed {
        fold: usize,
        cause: Box<Error>,
        /// Folds that finished.
        completed: Vec<crate::evaluation::FoldReport>,
    },

    #[error("bad binary file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn shape(message: impl Into<String>) -> Self {
        Error::Shape(message.into())
    }
}
