//! Configuration, file formats and command implementations for the
//! `fockpulse` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

pub use config::RunConfig;
pub use error::{CliError, Result};
