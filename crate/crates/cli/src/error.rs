use std::path::PathBuf;

use apdiff_core::ApError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("solver failure: {error}")]
    Solver {
        error: ApError,
        checkpoint: Option<PathBuf>,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Io(_) => 1,
            CliError::Verification { .. } => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
