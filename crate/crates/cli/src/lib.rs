//! Library half of the `routesim` binary: argument types, command
//! implementations and the manifests that make every run replayable.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod output;
pub mod select;

use thiserror::Error;

pub use args::{Cli, Command};
pub use commands::{run, Report};

/// Command failure, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or parameter values; exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or unroutable input; exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
