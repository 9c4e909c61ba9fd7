use std::path::PathBuf;

use thiserror::Error;

/// Exit status for bad input or configuration.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for environment failures (I/O, locked output).
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pathsel_core::Error),

    #[error("output directory {0} is in use by another run (remove .pathsel.lock if it is stale)")]
    Locked(PathBuf),

    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Input(_) => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
