use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::bench::{DEFAULT_NOISE, DEFAULT_TEST_SIZE, DEFAULT_TRAIN_SIZE};
use crate::mapping::Semiring;
use crate::neural::{EstimatorChoice, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    Ised,
    Reinforce,
    Indecater,
    Nasr,
}

impl std::str::FromStr for EstimatorName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ised" => EstimatorName::Ised,
            "reinforce" => EstimatorName::Reinforce,
            "indecater" => EstimatorName::Indecater,
            "nasr" => EstimatorName::Nasr,
            _ => return Err(ExperimentError::Config(format!("unknown estimator {s:?}"))),
        })
    }
}

/// Where training and test data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    /// Noisy one-hot features.
    Synthetic { noise: f64 },
    /// Formulas at `scale` times the 1K/1K/2K/6K length split (hwf only).
    Hwf { scale: f64, noise: f64 },
    /// Digit images from IDX files, composed per task.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
    /// Dataset cache files written by `gen-data`.
    Cache { train: PathBuf, test: PathBuf },
}

/// Replaces the builtin program with an external process that speaks the
/// line protocol; mappings stay those of the builtin task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalProgram {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

/// A complete experiment description. Every field has a default, so a TOML
/// file only needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: String,
    pub estimator: EstimatorName,
    /// Unset means min-max for hwf and add-mult for everything else.
    pub semiring: Option<Semiring>,
    pub k: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub hidden: Vec<usize>,
    pub train_size: usize,
    pub test_size: usize,
    pub data: DataSource,
    pub output_dir: PathBuf,
    pub timeout_secs: u64,
    pub external: Option<ExternalProgram>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: "sum2".into(),
            estimator: EstimatorName::Ised,
            semiring: None,
            k: 100,
            epochs: 10,
            lr: 1e-3,
            batch_size: 16,
            seeds: vec![0],
            hidden: vec![128],
            train_size: DEFAULT_TRAIN_SIZE,
            test_size: DEFAULT_TEST_SIZE,
            data: DataSource::Synthetic {
                noise: DEFAULT_NOISE,
            },
            output_dir: PathBuf::from("results"),
            timeout_secs: 10,
            external: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolved_semiring(&self) -> Semiring {
        self.semiring.unwrap_or(if self.task == "hwf" {
            Semiring::MinMax
        } else {
            Semiring::AddMult
        })
    }

    /// Fills in the task-dependent semiring so the artifact records what ran.
    pub fn resolved(&self) -> Self {
        ExperimentConfig {
            semiring: Some(self.resolved_semiring()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.train_size == 0 || self.test_size == 0 {
            return bad("dataset sizes must be positive");
        }
        match &self.data {
            DataSource::Synthetic { noise } | DataSource::Hwf { noise, .. } if !(*noise >= 0.0) => {
                return bad("noise must be non-negative")
            }
            DataSource::Hwf { scale, .. } if self.task != "hwf" || !(*scale > 0.0) => {
                return bad("hwf data needs task hwf and a positive scale")
            }
            _ => {}
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            estimator: match self.estimator {
                EstimatorName::Ised => EstimatorChoice::Ised {
                    semiring: self.resolved_semiring(),
                },
                EstimatorName::Reinforce => EstimatorChoice::Reinforce,
                EstimatorName::Indecater => EstimatorChoice::Indecater,
                EstimatorName::Nasr => EstimatorChoice::Nasr,
            },
            k: self.k,
            epochs: self.epochs,
            lr: self.lr,
            batch_size: self.batch_size,
        }
    }
}

/// Parses seed lists such as `0..2` (inclusive), `0,1,5` or `3`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, ExperimentError> {
    let bad = || ExperimentError::Config(format!("bad seed list {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}
