//! Command-line front end: problem files, chunked runs with checkpoints,
//! multi-prime arithmetic and result files.

pub mod config;
pub mod error;
pub mod input;
pub mod report;
pub mod runner;

pub use config::{RunConfig, TaskSpec};
pub use error::{code, CliError, CliResult};
pub use runner::{resume, run, RunOutcome};
