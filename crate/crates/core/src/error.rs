use std::path::PathBuf;

/// Errors produced anywhere in the ingestion, retrieval, answering and scoring pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("provider failed after {attempts} attempt(s): {message}")]
    Provider { attempts: u32, message: String },

    #[error("provider protocol error: {0}")]
    Protocol(String),

    #[error("unsupported store format version {found} (expected {expected})")]
    FormatVersion { expected: u32, found: u32 },

    #[error("evaluation aborted at pair {index}: {source}")]
    Eval {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
