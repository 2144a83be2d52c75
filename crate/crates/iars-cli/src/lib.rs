//! Command implementations and the JSON service behind the `iars` binary.

pub mod commands;
pub mod error;
pub mod input;
pub mod server;

pub use error::{CliError, CliResult};
