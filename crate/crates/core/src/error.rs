use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{0}: empty input")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input voltage {value} at index {index} outside [0, {vdd}]")]
    VoltageOutOfRange { index: usize, value: f64, vdd: f64 },

    #[error("{path}: {reason} (byte offset {offset})")]
    Format { path: PathBuf, offset: u64, reason: String },

    #[error("dataset not found at {path}: {reason}")]
    MissingData { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serialize(String),
}

/// Coarse error families, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Io,
    Numeric,
    Usage,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Format { .. } | Error::MissingData { .. } => ErrorCategory::Data,
            Error::Io { .. } | Error::Serialize(_) => ErrorCategory::Io,
            Error::Diverged { .. } | Error::NonFinite(_) => ErrorCategory::Numeric,
            Error::DimensionMismatch { .. }
            | Error::Empty(_)
            | Error::InvalidArgument(_)
            | Error::VoltageOutOfRange { .. } => ErrorCategory::Usage,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
