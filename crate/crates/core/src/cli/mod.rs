//! The `ulam` command line: config parsing, execution and argument handling.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{execute, Report, RunError};
