//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain (non-positive scale,
    /// probability outside [0, 1], empty input, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A malformed input file, located by path and 1-based line number.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    /// Rows of an input file are not in strictly increasing date order.
    #[error("ordering error for entity {entity}: {message}")]
    Ordering { entity: String, message: String },

    /// Series passed to an aggregation do not share the same hourly grid.
    #[error("timestamp alignment error for entity {entity}: {message}")]
    Alignment { entity: String, message: String },

    /// A temperature series does not cover a requested timestamp.
    #[error("temperature coverage error: {0}")]
    Coverage(String),

    /// MAPE denominator is zero at a specific timestamp.
    #[error("division domain error: actual load is zero at {timestamp}")]
    ZeroDenominator { timestamp: String },

    /// An experiment configuration failed schema or consistency checks.
    #[error("config error: {0}")]
    Config(String),

    /// A runtime failure that is not a caller-side validation problem.
    #[error("{0}")]
    Runtime(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Exit code the CLI maps this error to: 2 for validation and parse
    /// problems the caller can fix, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Parse { .. }
            | Error::Ordering { .. }
            | Error::Config(_) => 2,
            _ => 1,
        }
    }
}
