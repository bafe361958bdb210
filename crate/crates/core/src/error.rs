use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the domain of the law or rule it configures.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: String, message: String },

    /// The index law needs more atoms than the cap allows for an exact computation.
    /// Callers should fall back to Monte Carlo.
    #[error("truncating {law} to tail mass {tail_eps:e} needs more than {cap} atoms")]
    TruncationCap { law: String, tail_eps: f64, cap: usize },

    /// The generating-function bound applies only to rows of identically distributed summands.
    #[error("row {n} is not identically distributed; the generating-function bound does not apply")]
    NotIdenticallyDistributed { n: u64 },

    #[error("empty sample")]
    EmptySample,

    /// Scenario validation failure, tagged with the offending field.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what} in {path}: {message}")]
    Parse {
        what: &'static str,
        path: PathBuf,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than a failure at run time.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config { .. } | Error::Parse { .. }
        )
    }
}
