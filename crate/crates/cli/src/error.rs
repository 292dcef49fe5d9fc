use std::process::ExitCode;

use pdilab_core::PdiError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or invalid configuration and arguments.
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Capacity(String),

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

impl From<PdiError> for CliError {
    fn from(e: PdiError) -> Self {
        if e.is_capacity() {
            CliError::Capacity(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub(crate) fn io_error(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{context}: {e}"))
}
