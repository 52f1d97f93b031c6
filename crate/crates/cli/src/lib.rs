//! Configuration-driven runner for moment-subspace experiments.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod presets;

pub use config::{Backend, ExperimentConfig, InitialState, ObservableSpec, Orders, OutputSpec};
pub use error::CliError;
pub use pipeline::{run_experiment, ExperimentReport, OrderRun};
