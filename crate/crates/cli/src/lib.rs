//! Configuration, presets, run orchestration and sweeps for `riotsim`.

pub mod analyze;
pub mod config;
pub mod error;
pub mod presets;
pub mod runner;
pub mod sweep;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, CliResult};
pub use runner::{run, Summary};
