//! Library side of the `mctsfa` binary: configuration, presets, run records
//! and the four commands.

pub mod compare;
pub mod config;
pub mod evaluate;
pub mod front;
pub mod plot;
pub mod presets;
pub mod record;
pub mod train;

use std::process::ExitCode;

/// Error split by exit code: 1 for bad input, 2 for failures while working.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Runtime(_) => ExitCode::from(2),
        }
    }
}

impl From<mctsfa_core::Error> for CliError {
    fn from(e: mctsfa_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Environment variable naming the directory under which run records live.
pub const OUTPUT_ROOT_ENV: &str = "MCTSFA_OUTPUT_ROOT";
