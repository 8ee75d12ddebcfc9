//! CLI error taxonomy mapped onto process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 1: configuration or input-shape problems.
    #[error("{0}")]
    Config(String),
    /// Exit 2: solver instability.
    #[error("solver: {0}")]
    Solver(#[from] eitlab::mb::SolverError),
    /// Exit 3: filesystem and format I/O failures.
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}
