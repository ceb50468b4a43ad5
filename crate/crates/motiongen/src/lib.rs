//! File formats, checkpoints and the `motiongen` command-line tool built on
//! [`motiongen_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use cli::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
