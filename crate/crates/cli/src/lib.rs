//! Command-line front end of `tdsr-core`: TOML configs, initial data,
//! output files, presets and the `tdsr` binary's subcommands.

pub mod config;
pub mod driver;
pub mod error;
pub mod init;
pub mod output;
pub mod presets;

pub use config::{Overrides, RunConfig};
pub use driver::{converge_config, run_config, RunOutcome, StudyOutcome};
pub use error::{CliError, ConfigError};
