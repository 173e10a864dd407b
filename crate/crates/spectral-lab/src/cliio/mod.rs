//! Run configuration files, result persistence and the command-line entry
//! points for the `spectral-lab` binary.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

pub use config::{parse_config, Profile, RunConfig};
pub use run::run_command;
