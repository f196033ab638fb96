//! Experiment configuration, multi-seed runs, comparisons and the worked
//! reference cases.

mod config;
mod golden;
mod run;

use thiserror::Error;

pub use config::{parse_seeds, DataSource, EstimatorName, ExperimentConfig, ExternalProgram};
pub use golden::{golden, golden_p_hat, golden_summary, sum2_small, GOLDEN_CASES};
pub use run::{
    build_task, compare, datasets, execute, mean_std, run, Comparison, ComparisonRow, EpochRecord,
    RunReport, RunSummary, SeedResult,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Bench(#[from] crate::bench::BenchError),
    #[error(transparent)]
    Neural(#[from] crate::neural::NeuralError),
    #[error(transparent)]
    Estimate(#[from] crate::estimator::EstimateError),
    #[error("{0}")]
    Runtime(String),
}

impl ExperimentError {
    /// Process exit code: 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Bench(crate::bench::BenchError::UnknownTask(_)) => 1,
            _ => 2,
        }
    }
}
