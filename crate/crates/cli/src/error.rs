use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable input or an invalid configuration.
    #[error("{0}")]
    Usage(String),
    #[error("seed construction failed: {0}")]
    Seed(#[source] khessian_core::Error),
    #[error("solve failed: {0}")]
    Solve(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Seed(_) => 3,
            CliError::Solve(_) | CliError::Io(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
