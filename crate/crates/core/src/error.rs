//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value is outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Vector or matrix shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A CSV cell that failed to parse, located by file line and column name.
    #[error("{path}: line {row}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    /// A model file that failed validation on load.
    #[error("model file {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },

    /// Training produced a NaN or infinite loss (epoch is 1-based).
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// Operation invoked on a model of the wrong task direction.
    #[error("task mismatch: model is a {actual} model, operation needs {required}")]
    TaskMismatch {
        required: &'static str,
        actual: &'static str,
    },

    /// A condition cell has no records to form a reference mean.
    #[error("cell {cell_id} has no records")]
    EmptyCell { cell_id: &'static str },

    /// Percentage error against a zero reference is undefined.
    #[error("reference value is zero; percentage error undefined")]
    ZeroReference,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
