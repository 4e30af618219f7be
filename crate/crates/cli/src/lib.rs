//! Batch front end for the `dads` binary: scenario configs, runs, checks
//! and the files they produce.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{execute, EXIT_CONFIG, EXIT_FAIL, EXIT_OK};
pub use config::{load, parse, parse_with, ConfigError, Job};
