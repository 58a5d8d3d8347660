//! Command-line front end for the diffusivity solver: config parsing,
//! command dispatch and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, Outcome};
pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
pub use error::CliError;
