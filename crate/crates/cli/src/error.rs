use std::path::PathBuf;

use fgmi_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A failure inside one of the engines. `path` names the evaluation
    /// route that was running.
    #[error("{path}: {source}")]
    Engine {
        path: &'static str,
        #[source]
        source: CoreError,
    },

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    pub fn engine(path: &'static str) -> impl FnOnce(CoreError) -> CliError {
        move |source| CliError::Engine { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } => EXIT_USAGE,
            CliError::Engine { source, .. } => match source {
                // Bad sizes or values reaching an engine are input problems.
                CoreError::Domain(_) | CoreError::DimensionMismatch { .. } => EXIT_USAGE,
                CoreError::Invariant(_) => EXIT_INVARIANT,
                _ => EXIT_NUMERICAL,
            },
            CliError::Write { .. } | CliError::Serialize(_) => EXIT_INVARIANT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
