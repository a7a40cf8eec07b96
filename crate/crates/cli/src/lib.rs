//! Batch front-end for the `twostage` toolkit.
//!
//! Reads scenario configs (flat `key = value` sections), orchestrates the
//! design/montecarlo/analysis pipeline, and emits CSV tables of tail
//! probabilities, CDF-distance curves over an n grid, convergence
//! diagnostics, and optimal stage-1 size search traces. All outputs are
//! deterministic: the same config and seed produce byte-identical files at
//! any worker count.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{dispatch, run_diagnostics, run_figure, run_n1star, run_table, Artifact};
pub use config::{parse_config, spec_hash, ExperimentSpec, Overrides};
pub use error::{CliError, Result};
