use std::path::PathBuf;

use thiserror::Error;

use tdsr_core::{ModelError, RunError, StudyError};

use crate::output::FormatError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for solver failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) => 4,
            CliError::Config(_) => 2,
            // a model that cannot be built from a parsed config is a config problem
            CliError::Model(_) => 2,
            CliError::Run(RunError::InvalidSchedule(_)) => 2,
            CliError::Study(StudyError::TooFewLevels(_) | StudyError::BadTolerance(_)) => 2,
            CliError::Run(_) | CliError::Study(_) => 3,
            CliError::Io { .. } | CliError::Format(_) => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    /// Every problem found, one per entry.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}
