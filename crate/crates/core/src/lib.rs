//! Gradient estimation for neural perception models composed with black-box
//! programs, trained from end-to-end input/output pairs only.
//!
//! The crate is organised along the training pipeline:
//!
//! - [`mapping`]: structural mappings, their set and tensor readings, the
//!   vectorizer and the aggregator.
//! - [`blackbox`]: the program abstraction, built-in benchmark programs and
//!   an adapter for external processes.
//! - [`sampler`]: deterministic categorical sampling keyed by example,
//!   sample and input index.
//! - [`estimator`]: the sampled-summary estimator plus REINFORCE, NASR,
//!   IndeCateR and exact enumeration references.
//! - [`neural`]: a small MLP perception model, manual backprop, Adam, and the
//!   training loop.
//! - [`bench`]: tasks, dataset generation and loading, evaluation metrics.
//! - [`experiment`]: configuration, multi-seed runs, comparisons and the
//!   worked reference cases.

pub mod bench;
pub mod blackbox;
pub mod estimator;
pub mod experiment;
pub mod mapping;
pub mod neural;
pub mod sampler;

pub use blackbox::{Program, ProgramError};
pub use mapping::{DistValue, Semiring, SetValue, StructuralMapping};
