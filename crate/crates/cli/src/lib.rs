//! Library side of the `kvf` command-line tool: the scenario-file format
//! and the error-to-exit-code mapping, shared with the integration tests.

pub mod scenario;

use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input: bad scenario files, expressions, or argument values.
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// The operation ran but failed (checks, classification, integration).
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Data(_) => ExitCode::from(2),
            CliError::Io { .. } => ExitCode::from(3),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }
}
