//! Orchestration behind the `kgres` binary: configuration, the commands and
//! their report documents.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

pub use commands::{analyze_command, decay_command, evolve_command, verify_command, CommandOutput, Status};
pub use config::{parse_config, RunConfig};
pub use report::{Command, ReportDocument, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] kgres::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {what}: {message}")]
    Output { what: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 2,
            CliError::Output { .. } => 2,
            _ => 1,
        }
    }
}
