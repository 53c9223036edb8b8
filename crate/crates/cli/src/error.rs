use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] kinbound::Error),
    #[error("{0} invariant check(s) failed")]
    CheckFailed(usize),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io(_) | CliError::Csv(_) => 2,
            CliError::CheckFailed(_) => 3,
        })
    }
}
