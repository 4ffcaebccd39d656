//! Experiment runner, file formats and command line for the `cabsim-core`
//! simulator.
//!
//! - [`config`]: the JSON experiment file.
//! - [`runner`]: parallel replications, sweeps and Monte Carlo estimators.
//! - [`output`]: CSV and JSON writers.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use error::{CliError, Result};
