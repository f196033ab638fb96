//! Perception model: an MLP with one softmax head per Discrete component,
//! hand-written reverse-mode gradients, Adam, checkpoints and the training
//! loop.

mod adam;
mod checkpoint;
mod mlp;
mod train;

use thiserror::Error;

pub use adam::AdamState;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use mlp::{ForwardCache, Layer, Mlp};
pub use train::{
    backprop_perception, estimate, perceive, train, EpochMetrics, EstimatorChoice, Perception,
    TrainConfig, TrainOutcome,
};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("heads must be Discrete mappings, got {0}")]
    UnsupportedHead(String),
    #[error(transparent)]
    Estimate(#[from] crate::estimator::EstimateError),
    #[error(transparent)]
    Bench(#[from] crate::bench::BenchError),
}
