//! Experiment orchestration: configuration, the four drivers and their
//! CSV/JSON/SVG outputs.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;

pub use config::{Experiment, ExperimentConfig, Overrides, Profile};
pub use experiments::{run, run_bias_compare, run_ntk_study, run_simulate, run_train_compare};
pub use report::ExperimentReport;
