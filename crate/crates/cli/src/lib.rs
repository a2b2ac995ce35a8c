//! Library side of the `quietzone` command: configuration resolution, the
//! five report commands and the CSV writer they share.

pub mod commands;
pub mod config;
pub mod csv;

use thiserror::Error;

pub use commands::{run, CommandOutput, Subcommand};
pub use config::{CliArgs, CorrKind, FileConfig, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file or parameter combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A validation run exceeded its tolerance.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
        }
    }
}

impl From<quietzone::Error> for CliError {
    fn from(e: quietzone::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
