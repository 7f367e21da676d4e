use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    /// Factorization failure, non-finite intermediate values and similar.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed file contents (bad magic, truncation, inconsistent header).
    #[error("{path}: {kind}")]
    Format { path: PathBuf, kind: FormatError },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("iteration {iteration}: {source}")]
    Training {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("not a model file")]
    NotAModelFile,
    #[error("not a feature file")]
    NotAFeatureFile,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated file")]
    Truncated,
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("label index {index} out of range for {classes} classes")]
    LabelOutOfRange { index: u32, classes: u32 },
    #[error("inconsistent header: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, kind: FormatError) -> Self {
        Error::Format {
            path: path.into(),
            kind,
        }
    }

    /// Innermost error, skipping iteration context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Training { source, .. } => source.root(),
            other => other,
        }
    }
}
