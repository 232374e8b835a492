use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are coarse on purpose: the CLI maps each to an exit code and a
/// machine-parseable kind string (see [`Error::kind`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate {what}: {name}")]
    Duplicate { what: &'static str, name: String },
    #[error("invalid value: {0}")]
    Value(String),
    #[error("insufficient samples: {found} shared samples, at least {required} required")]
    InsufficientSamples { found: usize, required: usize },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singularity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("index {index} out of range (length {len})")]
    Index { index: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Stable short identifier for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format(_) => "format",
            Error::Parse { .. } => "parse",
            Error::Duplicate { .. } => "duplicate",
            Error::Value(_) => "value",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::Dimension(_) => "dimension",
            Error::Singularity(_) => "singularity",
            Error::Domain(_) => "domain",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::Index { .. } => "index",
            Error::Precondition(_) => "precondition",
            Error::Serialization(_) => "serialization",
        }
    }

    /// Whether the error stems from bad input (as opposed to a computation
    /// that could not be carried out on otherwise valid input).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Format(_)
                | Error::Parse { .. }
                | Error::Duplicate { .. }
                | Error::Value(_)
                | Error::InsufficientSamples { .. }
                | Error::Index { .. }
                | Error::Precondition(_)
                | Error::Serialization(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
