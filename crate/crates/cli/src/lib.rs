//! Batch front end for the su11 harness: flat configs, run modes and report
//! files.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, Mode, Source};
pub use report::{emit_report, Format, Record, ReportRow};
pub use run::{run, Counterexample, Outcome};
