//! IO, file formats and the command-line harness around `qcommit-core`.

pub mod agents;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod lp;
pub mod pipeline;
pub mod report;

pub use error::{CliError, CliResult};
