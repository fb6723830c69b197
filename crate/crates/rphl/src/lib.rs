//! Command-line harness around `rphl-core`: JSON experiment configurations,
//! parameter sweeps, and self-auditing JSON reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, run_with_limit, Command, Outcome};
pub use config::{ExperimentConfig, Setup};
pub use error::HarnessError;
pub use report::RunReport;
