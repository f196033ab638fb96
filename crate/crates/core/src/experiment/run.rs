use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{DataSource, ExperimentConfig, ExperimentError};
use crate::bench::{
    compose_dataset, hwf_counts, hwf_dataset, load_dataset, load_idx, synth_dataset, Dataset, TaskSpec,
};
use crate::blackbox::external::ExternalAdapter;
use crate::blackbox::ProcessSpec;
use crate::neural::{save_checkpoint, train, Checkpoint};

/// One line of `metrics.ndjson`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub seed: u64,
    pub epoch: usize,
    pub train_loss: f64,
    pub program_calls: u64,
    pub calls_per_example: f64,
    pub test_task_accuracy: f64,
    pub test_symbol_accuracy: f64,
    pub test_mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    /// Test task accuracy after the last epoch (after zero epochs: untrained).
    pub final_accuracy: f64,
    pub final_symbol_accuracy: f64,
    pub program_calls: u64,
    pub calls_per_example: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub task: String,
    pub estimator: String,
    pub k: usize,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    pub accuracy_mean: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub accuracy_std: f64,
    pub calls_per_example: f64,
    pub per_seed: Vec<SeedResult>,
    pub config: ExperimentConfig,
    pub defaults: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<EpochRecord>,
    pub summary: RunSummary,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// The task, with the program swapped for an external process if configured.
pub fn build_task(cfg: &ExperimentConfig) -> Result<TaskSpec, ExperimentError> {
    let mut task = TaskSpec::builtin(&cfg.task)?;
    if let Some(ext) = &cfg.external {
        let args: Vec<&str> = ext.args.iter().map(String::as_str).collect();
        let spec = ProcessSpec::new(&ext.command, &args).with_timeout(Duration::from_secs(cfg.timeout_secs));
        let adapter = ExternalAdapter::new(
            spec,
            task.program.input_mappings().to_vec(),
            task.program.output_mapping().clone(),
        );
        task.program = Arc::new(adapter).into_program(task.name.clone());
    }
    task.hidden_sizes = cfg.hidden.clone();
    task.train_size = cfg.train_size;
    task.test_size = cfg.test_size;
    Ok(task)
}

/// Train and test sets for one seed. Synthetic data uses seeds `2s` and
/// `2s + 1` so each run seed gets its own dataset.
pub fn datasets(cfg: &ExperimentConfig, task: &TaskSpec, seed: u64) -> Result<(Dataset, Dataset), ExperimentError> {
    let (train_seed, test_seed) = (seed.wrapping_mul(2), seed.wrapping_mul(2).wrapping_add(1));
    Ok(match &cfg.data {
        DataSource::Synthetic { noise } => (
            synth_dataset(task, cfg.train_size, *noise, train_seed)?,
            synth_dataset(task, cfg.test_size, *noise, test_seed)?,
        ),
        DataSource::Hwf { scale, noise } => (
            hwf_dataset(task, &hwf_counts(*scale), *noise, train_seed)?,
            synth_dataset(task, cfg.test_size, *noise, test_seed)?,
        ),
        DataSource::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } => {
            let raw_train = load_idx(train_images, train_labels)?;
            let raw_test = load_idx(test_images, test_labels)?;
            (
                compose_dataset(&raw_train, task, cfg.train_size, train_seed)?,
                compose_dataset(&raw_test, task, cfg.test_size, test_seed)?,
            )
        }
        DataSource::Cache { train, test } => (load_dataset(train, task)?, load_dataset(test, task)?),
    })
}

/// Trains once per seed and returns every record, without touching disk
/// beyond reading data.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport, ExperimentError> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let task = build_task(&cfg)?;
    let tc = cfg.train_config();
    let mut records = Vec::new();
    let mut per_seed = Vec::new();
    for &seed in &cfg.seeds {
        let (train_set, test_set) = datasets(&cfg, &task, seed)?;
        let out = train(&task, &tc, train_set.examples(), &test_set, seed)?;
        let n = train_set.len() as f64;
        for e in &out.epochs {
            records.push(EpochRecord {
                seed,
                epoch: e.epoch,
                train_loss: e.train_loss,
                program_calls: e.program_calls,
                calls_per_example: e.program_calls as f64 / n,
                test_task_accuracy: e.test.task_accuracy,
                test_symbol_accuracy: e.test.symbol_accuracy,
                test_mean_loss: e.test.mean_loss,
            });
        }
        let final_metrics = match out.epochs.last() {
            Some(e) => e.test.clone(),
            None => crate::bench::evaluate(&out.params, &task, &test_set)?,
        };
        let calls: u64 = out.epochs.iter().map(|e| e.program_calls).sum();
        per_seed.push(SeedResult {
            seed,
            final_accuracy: final_metrics.task_accuracy,
            final_symbol_accuracy: final_metrics.symbol_accuracy,
            program_calls: calls,
            calls_per_example: calls as f64 / (n * out.epochs.len().max(1) as f64),
        });
        if !cfg.output_dir.as_os_str().is_empty() && cfg.output_dir.exists() {
            let ckpt = Checkpoint {
                seed,
                params: out.params,
                adam: Some(out.adam),
            };
            save_checkpoint(&cfg.output_dir.join(format!("model-seed{seed}.ckpt")), &ckpt)
                .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        }
    }
    let accs: Vec<f64> = per_seed.iter().map(|s| s.final_accuracy).collect();
    let (accuracy_mean, accuracy_std) = mean_std(&accs);
    let calls_per_example = per_seed.iter().map(|s| s.calls_per_example).sum::<f64>() / per_seed.len() as f64;
    let summary = RunSummary {
        task: cfg.task.clone(),
        estimator: tc.estimator.label().to_string(),
        k: cfg.k,
        epochs: cfg.epochs,
        seeds: cfg.seeds.clone(),
        accuracy_mean,
        accuracy_std,
        calls_per_example,
        per_seed,
        config: cfg.clone(),
        defaults: ExperimentConfig::default(),
    };
    Ok(RunReport { records, summary })
}

fn write_file(path: &Path, text: &str) -> Result<(), ExperimentError> {
    let mut f = std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| ExperimentError::Runtime(e.to_string()))
}

/// [`execute`] plus `metrics.ndjson`, `summary.json` and one checkpoint per
/// seed in `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, ExperimentError> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| ExperimentError::Runtime(format!("{}: {e}", cfg.output_dir.display())))?;
    let report = execute(cfg)?;
    let mut lines = String::new();
    for r in &report.records {
        lines.push_str(&serde_json::to_string(r).expect("record serializes"));
        lines.push('\n');
    }
    write_file(&cfg.output_dir.join("metrics.ndjson"), &lines)?;
    let summary = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    write_file(&cfg.output_dir.join("summary.json"), &(summary + "\n"))?;
    Ok(report)
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub estimator: String,
    pub semiring: Option<String>,
    pub k: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub calls_per_example: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub task: String,
    pub rows: Vec<ComparisonRow>,
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "task: {}", self.task)?;
        writeln!(f, "{:<10} {:<9} {:>6} {:>18} {:>14}", "estimator", "semiring", "k", "accuracy", "calls/example")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<10} {:<9} {:>6} {:>10.4} ± {:<6.4} {:>14.1}",
                r.estimator,
                r.semiring.as_deref().unwrap_or("-"),
                r.k,
                r.accuracy_mean,
                r.accuracy_std,
                r.calls_per_example
            )?;
        }
        Ok(())
    }
}

/// Runs every config (which must share a task) and tabulates the results.
pub fn compare(configs: &[ExperimentConfig]) -> Result<Comparison, ExperimentError> {
    if configs.len() < 2 {
        return Err(ExperimentError::Config("compare needs at least two configs".into()));
    }
    let task = &configs[0].task;
    if configs.iter().any(|c| &c.task != task) {
        return Err(ExperimentError::Config("compared configs must share a task".into()));
    }
    let mut rows = Vec::new();
    for cfg in configs {
        let s = execute(&ExperimentConfig {
            output_dir: Default::default(),
            ..cfg.clone()
        })?
        .summary;
        rows.push(ComparisonRow {
            semiring: (s.estimator == "ised").then(|| cfg.resolved_semiring().to_string()),
            estimator: s.estimator,
            k: s.k,
            accuracy_mean: s.accuracy_mean,
            accuracy_std: s.accuracy_std,
            calls_per_example: s.calls_per_example,
        });
    }
    Ok(Comparison { task: task.clone(), rows })
}
