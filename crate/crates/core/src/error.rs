use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by every stage of the pipeline.
///
/// Variants are grouped by what went wrong rather than where: schema and
/// argument problems are caller mistakes, ingestion problems are data
/// problems addressed to a row/column, numerical failures come from the
/// fitting kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error at row {row}, column '{column}': {message}")]
    Ingest {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn ingest(row: usize, column: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Ingest {
            row,
            column: column.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
