//! Configuration, execution and output for the `qtomo` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod functions;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_in, serialize, ConfigError, ConfigErrors, RunConfig};
pub use output::ResultTable;
pub use run::{run, ExitStatus, Outcome, RunError};
