//! Standard-library front end for `argmin-lab-core`: CSV ingestion, JSON
//! and CSV reports with atomic writes, a rayon replication engine and the
//! `argmin-lab` command line.

pub mod commands;
pub mod data;
pub mod engine;
pub mod error;
pub mod output;
pub mod report;

pub use commands::{run, Command, Completed, Invocation};
pub use engine::{run_prepared, run_scenario_parallel};
pub use error::{exit, CliError};
