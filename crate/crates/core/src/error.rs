use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("could not generate a connected {kind} graph after {attempts} attempts")]
    Generation { kind: String, attempts: usize },

    #[error("communication graph is not connected")]
    Disconnected,

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    EigenConvergence { sweeps: usize, residual: f64 },

    #[error(
        "distributed averaging did not converge in {rounds} rounds (disagreement {disagreement:e})"
    )]
    Averaging { rounds: usize, disagreement: f64 },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("`{key}` has {found} entries, expected {expected}")]
    LengthMismatch {
        key: String,
        expected: usize,
        found: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the content of a scenario description.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::Validation { .. }
                | Error::LengthMismatch { .. }
                | Error::Disconnected
                | Error::Generation { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
