//! Experiment runner behind the `rsg` binary.

pub mod build;
pub mod compare;
pub mod config;
pub mod error;
pub mod run;

pub use config::RunSpec;
pub use error::{CliError, CliResult};
