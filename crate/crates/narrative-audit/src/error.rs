//! Error type shared across the audit pipeline.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the audit pipeline.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A caller violated an operation's precondition (unknown code, bad
    /// vector length, infeasible parameter, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("QA response parse failure: {message}; raw response: {raw:?}")]
    QaParse { message: String, raw: String },

    #[error("QA response schema violation: {message}; raw response: {raw:?}")]
    QaSchema { message: String, raw: String },

    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("http error: {0}")]
    Http(#[from] reqwest::Error),
}

impl AuditError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AuditError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        AuditError::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, AuditError>;
