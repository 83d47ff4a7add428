//! Front end for the `fermigate` binary: configuration, command dispatch
//! and output encoding.

pub mod commands;
pub mod config;
pub mod output;

/// Process exit status for each failure class.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] fermigate_core::Error),
    #[error("output error: {0}")]
    Output(String),
    #[error("{0} scenario(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) | CliError::Output(_) | CliError::ChecksFailed(_) => EXIT_FAILURE,
        }
    }
}
