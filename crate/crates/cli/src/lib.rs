//! Configuration-driven experiment runner for `hypokin`.

pub mod config;
pub mod run;

pub use config::{validate, ExperimentConfig, Kind, Violation};
pub use run::{run, Outcome, RunOptions};
