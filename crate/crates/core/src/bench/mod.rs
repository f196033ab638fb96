//! Benchmark tasks, dataset generation and loading, and evaluation.

mod data;
mod eval;
mod idx;
mod task;

use thiserror::Error;

pub use data::{
    compose_dataset, hwf_counts, hwf_dataset, load_dataset, save_dataset, synth_dataset, Dataset,
    Example, DEFAULT_NOISE,
};
pub use eval::{evaluate, Metrics};
pub use idx::{load_idx, parse_idx, RawDigits, IMAGES_MAGIC, LABELS_MAGIC};
pub use task::{InputLayout, SymbolPrior, TaskSpec, DEFAULT_HIDDEN, DEFAULT_TEST_SIZE, DEFAULT_TRAIN_SIZE};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("unsupported task: {0}")]
    UnsupportedTask(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("could not generate a valid example for {0}")]
    Generation(String),
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("model: {0}")]
    Model(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
