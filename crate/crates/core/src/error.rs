use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A grid, cover or truncation would exceed its configured budget.
    #[error("resource limit: {what} needs {required}, cap is {cap}")]
    Resource {
        what: String,
        required: u64,
        cap: u64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the problem being too large or having no
    /// valid construction, as opposed to bad input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::Resource { .. } | Error::Infeasible(_) | Error::Quadrature(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
