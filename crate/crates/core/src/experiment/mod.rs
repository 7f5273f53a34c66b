//! Config-driven experiments writing CSV/JSON reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{Environment, ExperimentReport, MetricRow, SummaryRow};
pub use run::{oracle_toy_histogram, run_experiment};
