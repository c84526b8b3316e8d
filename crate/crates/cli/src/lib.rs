//! Experiment harness for the `hermite-nn` solver: configuration parsing,
//! training and collocation runs, and CSV/SVG artifact emission.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod heatmap;
pub mod output;

pub use config::{parse_config, ExperimentConfig, Method};
pub use experiment::{run_basis, run_compare, run_experiment, ComparisonReport, RunSummary};
pub use heatmap::emit_heatmap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn config_at(line: usize, msg: impl Into<String>) -> Self {
        CliError::Config(format!("line {line}: {}", msg.into()))
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 0 success, 1 configuration or I/O problem, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            CliError::Config(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<hermite_nn::Error> for CliError {
    fn from(e: hermite_nn::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
