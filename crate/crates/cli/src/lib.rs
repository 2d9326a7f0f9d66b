//! Library side of the `learnlab` command-line tool: experiment configs,
//! the runner, verification suites and plot-data export.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
