use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown network {0:?}")]
    UnknownNetwork(String),

    #[error("channel {channel:?} of network {network:?} is missing from table {table:?}")]
    MissingChannel {
        network: String,
        channel: String,
        table: String,
    },

    #[error("channel {0:?} has zero variance")]
    ZeroVariance(String),

    #[error("correlation matrix is singular; retry with a positive shrinkage (e.g. 0.1)")]
    SingularMatrix,

    #[error("homology dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("persistence pair ({birth}, {death}) exceeds the essential cap {cap}")]
    ExceedsCap { birth: f64, death: f64, cap: f64 },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// True when the error came from a size guard rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
