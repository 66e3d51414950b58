//! Declarative experiment runner on top of `oamcap-core`.
//!
//! An [`config::ExperimentConfig`] selects one sweep; [`experiments::run_experiment`]
//! turns it into a [`table::ResultTable`], which is written as CSV (and
//! optionally SVG) with a metadata preamble sufficient to re-run it.

pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod table;
pub mod verify;

pub use config::{Experiment, ExperimentConfig, GainScale};
pub use error::{CliError, CliResult};
pub use experiments::run_experiment;
pub use table::ResultTable;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
