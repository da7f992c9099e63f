//! Command-line front end for the pffrac solver.

pub mod commands;
pub mod config;

pub use commands::{cmd_mesh_info, cmd_run, cmd_run_with, cmd_verify, RunOptions};
pub use config::{ConfigError, ResolvedConfig, RunConfig};
