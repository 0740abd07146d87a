//! Experiment orchestration: configuration, the per-trial pipeline and
//! plot-data aggregation.

pub mod config;
pub mod plot;
pub mod runner;

pub use config::{Environment, ExperimentConfig};
pub use plot::{emit_plot_data, read_metrics, summarize, SummaryRow};
pub use runner::{run_experiment, run_trial, ExperimentOutcome, TaskTiming, TrialOutput};
