//! Library side of the `qex` command-line tool: configs, dispatch and
//! artifact writers.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{resolve_tuple, run, validate_tuple_file};
pub use config::{CommandKind, ExperimentConfig, Params, RunRecord};
