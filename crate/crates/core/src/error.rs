use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at index {index} in {what}")]
    NonFinite { what: &'static str, index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A flow produced non-finite output or its inner solver failed to converge.
    #[error("stability failure{}: {detail}", operator.map(|id| format!(" in operator {id}")).unwrap_or_default())]
    Stability { operator: Option<usize>, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn stability(detail: impl Into<String>) -> Self {
        Error::Stability {
            operator: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach the id of the dictionary operator that failed.
    pub fn with_operator(self, id: usize) -> Self {
        match self {
            Error::Stability { detail, .. } => Error::Stability {
                operator: Some(id),
                detail,
            },
            Error::NonFinite { what, index } => Error::Stability {
                operator: Some(id),
                detail: format!("non-finite value at index {index} in {what}"),
            },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Stability { .. } | Error::NonFinite { .. })
    }
}

/// Failures while decoding a trajectory container.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
}
