use std::path::Path;

use thiserror::Error;

/// Failures mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected arguments or a failure inside the library: exit 1.
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Module(#[from] clda::Error),
    /// Unreadable or unwritable files: exit 2.
    #[error("{0}")]
    Io(String),
    /// Malformed input: exit 2.
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn parse(path: &Path, err: csv::Error) -> Self {
        CliError::Parse(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Module(_) => 1,
            CliError::Io(_) | CliError::Parse(_) => 2,
        }
    }
}
