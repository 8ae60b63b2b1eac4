//! File formats and command implementations behind the `artipose` binary.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;

pub use error::{CliError, Result};
