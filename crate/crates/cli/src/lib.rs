//! Scenario-driven experiment harness: TOML experiment configurations,
//! single-run and Monte-Carlo execution, estimator comparison, and
//! deterministic file output (summary JSON, per-trial JSONL, spectrum CSV).

pub mod config;
pub mod runner;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use runner::{compare_estimators, run_experiment, write_outputs, RunOutput};
