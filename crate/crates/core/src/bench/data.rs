use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

use super::task::formula;
use super::{BenchError, RawDigits, TaskSpec};
use crate::blackbox::{decode_value, encode_value};
use crate::mapping::SetValue;

pub const DEFAULT_NOISE: f64 = 0.3;
const MAX_REJECTIONS: usize = 100_000;

/// What training code gets to see of one example: features and the
/// end-to-end output, never the intermediate symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    /// `features[input][slot]` is one feature vector.
    pub features: Vec<Vec<Vec<f64>>>,
    pub target: SetValue,
}

/// Examples plus, held apart, the hidden symbols that produced them. The
/// symbols are only reachable through [`Dataset::diagnostic_symbols`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    task: String,
    feature_dim: usize,
    examples: Vec<Example>,
    symbols: Vec<Vec<SetValue>>,
}

impl Dataset {
    pub fn new(
        task: &TaskSpec,
        examples: Vec<Example>,
        symbols: Vec<Vec<SetValue>>,
    ) -> Result<Self, BenchError> {
        if examples.len() != symbols.len() {
            return Err(BenchError::Inconsistent("symbol count differs from example count".into()));
        }
        let feature_dim = examples
            .first()
            .and_then(|e| e.features.first())
            .and_then(|f| f.first())
            .map_or(task.feature_dim(), Vec::len);
        for (e, s) in examples.iter().zip(&symbols) {
            let ok = task.program.evaluate(s).map(|y| y.approx_eq(&e.target)).unwrap_or(false);
            if !ok {
                return Err(BenchError::Inconsistent("target differs from program(symbols)".into()));
            }
            if e.features.iter().flatten().any(|f| f.len() != feature_dim) {
                return Err(BenchError::Inconsistent("ragged feature vectors".into()));
            }
        }
        Ok(Dataset {
            task: task.name.clone(),
            feature_dim,
            examples,
            symbols,
        })
    }

    pub fn task(&self) -> &str {
        &self.task
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// The supervision-safe view used for training.
    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    /// Hidden symbols per example. Diagnostics only: evaluation uses them for
    /// symbol accuracy, training never does.
    pub fn diagnostic_symbols(&self) -> &[Vec<SetValue>] {
        &self.symbols
    }
}

/// Draws hidden symbols until the program accepts them.
fn valid_symbols(task: &TaskSpec, rng: &mut ChaCha20Rng) -> Result<(Vec<SetValue>, SetValue), BenchError> {
    for _ in 0..MAX_REJECTIONS {
        let symbols = task.draw_symbols(rng);
        if let Ok(y) = task.program.evaluate(&symbols) {
            return Ok((symbols, y));
        }
    }
    Err(BenchError::Generation(task.name.clone()))
}

fn noisy_features(
    task: &TaskSpec,
    symbols: &[SetValue],
    noise: Option<&Normal<f64>>,
    rng: &mut ChaCha20Rng,
) -> Vec<Vec<Vec<f64>>> {
    symbols
        .iter()
        .enumerate()
        .map(|(i, v)| {
            task.slots(i, v)
                .into_iter()
                .map(|s| {
                    let mut f = task.one_hot(s);
                    if let Some(n) = noise {
                        f.iter_mut().for_each(|x| *x += n.sample(rng));
                    }
                    f
                })
                .collect()
        })
        .collect()
}

fn normal(sigma: f64) -> Result<Option<Normal<f64>>, BenchError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(BenchError::InvalidArgument(format!("noise σ = {sigma}")));
    }
    Ok((sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("valid σ")))
}

/// Synthetic dataset: valid hidden symbols, features one-hot plus
/// `N(0, σ²)` noise per coordinate, output computed by the program.
pub fn synth_dataset(task: &TaskSpec, n: usize, sigma: f64, seed: u64) -> Result<Dataset, BenchError> {
    if n == 0 {
        return Err(BenchError::InvalidArgument("n must be at least 1".into()));
    }
    let noise = normal(sigma)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        let (s, y) = valid_symbols(task, &mut rng)?;
        examples.push(Example {
            features: noisy_features(task, &s, noise.as_ref(), &mut rng),
            target: y,
        });
        symbols.push(s);
    }
    Dataset::new(task, examples, symbols)
}

/// Formula counts per length for a given scale of the 1K/1K/2K/6K split.
pub fn hwf_counts(scale: f64) -> Vec<(usize, usize)> {
    [(1, 1000.0), (3, 1000.0), (5, 2000.0), (7, 6000.0)]
        .iter()
        .map(|&(len, c)| (len, (c * scale).round() as usize))
        .collect()
}

/// Exactly `count` error-free formulas of each requested length, in length
/// order.
pub fn hwf_dataset(
    task: &TaskSpec,
    counts: &[(usize, usize)],
    sigma: f64,
    seed: u64,
) -> Result<Dataset, BenchError> {
    if task.program.name() != "hwf" {
        return Err(BenchError::UnsupportedTask(format!("{} is not hwf", task.name)));
    }
    let noise = normal(sigma)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut examples = Vec::new();
    let mut symbols = Vec::new();
    for &(len, count) in counts {
        if len % 2 == 0 || len > crate::blackbox::hwf::MAX_LEN {
            return Err(BenchError::InvalidArgument(format!("formula length {len}")));
        }
        for _ in 0..count {
            let mut attempts = 0;
            let (s, y) = loop {
                let s = vec![formula(len, &mut rng)];
                if let Ok(y) = task.program.evaluate(&s) {
                    break (s, y);
                }
                attempts += 1;
                if attempts > MAX_REJECTIONS {
                    return Err(BenchError::Generation(task.name.clone()));
                }
            };
            examples.push(Example {
                features: noisy_features(task, &s, noise.as_ref(), &mut rng),
                target: y,
            });
            symbols.push(s);
        }
    }
    Dataset::new(task, examples, symbols)
}

/// Dataset whose slot features are real digit images drawn (with
/// replacement) from `raw` to match each hidden symbol.
pub fn compose_dataset(raw: &RawDigits, task: &TaskSpec, n: usize, seed: u64) -> Result<Dataset, BenchError> {
    if raw.labels.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    if task.feature_dim() != 10 || task.head_spec().len() != 1 {
        return Err(BenchError::UnsupportedTask(format!("{} does not read digits", task.name)));
    }
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); 10];
    for (i, &l) in raw.labels.iter().enumerate() {
        by_label[l as usize].push(i);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        let (s, y) = valid_symbols(task, &mut rng)?;
        let mut features = Vec::with_capacity(s.len());
        for (i, v) in s.iter().enumerate() {
            let mut slots = Vec::new();
            for sym in task.slots(i, v) {
                let d = sym.as_discrete().expect("digit symbol");
                let pool = &by_label[d];
                if pool.is_empty() {
                    return Err(BenchError::Inconsistent(format!("no image of digit {d}")));
                }
                slots.push(raw.images[pool[rng.random_range(0..pool.len())]].clone());
            }
            features.push(slots);
        }
        examples.push(Example { features, target: y });
        symbols.push(s);
    }
    Dataset::new(task, examples, symbols)
}

/// Writes a dataset cache file: one JSON document
/// `{"format": "ised-dataset", "version": 1, "task", "feature_dim", "examples": [...]}`
/// where each example is `{"features", "target", "symbols"}` with values in
/// the program's wire encoding.
pub fn save_dataset(path: &Path, task: &TaskSpec, ds: &Dataset) -> Result<(), BenchError> {
    let p = &task.program;
    let examples: Vec<Value> = ds
        .examples
        .iter()
        .zip(&ds.symbols)
        .map(|(e, s)| {
            json!({
                "features": e.features,
                "target": encode_value(p.output_mapping(), &e.target),
                "symbols": s.iter().zip(p.input_mappings()).map(|(v, m)| encode_value(m, v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({
        "format": "ised-dataset",
        "version": 1,
        "task": ds.task,
        "feature_dim": ds.feature_dim,
        "examples": examples,
    });
    std::fs::write(path, serde_json::to_string(&doc).expect("serializable"))?;
    Ok(())
}

pub fn load_dataset(path: &Path, task: &TaskSpec) -> Result<Dataset, BenchError> {
    let bad = |m: &str| BenchError::Inconsistent(format!("{}: {m}", path.display()));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| bad(&e.to_string()))?;
    if doc["format"] != "ised-dataset" || doc["version"] != 1 {
        return Err(bad("not a version 1 dataset cache"));
    }
    if doc["task"] != task.name.as_str() {
        return Err(bad("dataset belongs to another task"));
    }
    let p = &task.program;
    let mut examples = Vec::new();
    let mut symbols = Vec::new();
    for e in doc["examples"].as_array().ok_or_else(|| bad("examples"))? {
        let features: Vec<Vec<Vec<f64>>> =
            serde_json::from_value(e["features"].clone()).map_err(|e| bad(&e.to_string()))?;
        let target = decode_value(p.output_mapping(), &e["target"]).ok_or_else(|| bad("target"))?;
        let syms = e["symbols"]
            .as_array()
            .ok_or_else(|| bad("symbols"))?
            .iter()
            .zip(p.input_mappings())
            .map(|(v, m)| decode_value(m, v).ok_or_else(|| bad("symbol")))
            .collect::<Result<Vec<_>, _>>()?;
        examples.push(Example { features, target });
        symbols.push(syms);
    }
    Dataset::new(task, examples, symbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_match_programs() {
        for name in ["sum2", "mod2", "add-sub", "count-3-or-4", "leaf", "sort3", "hwf"] {
            let t = TaskSpec::builtin(name).unwrap();
            let ds = synth_dataset(&t, 200, 0.3, 1).unwrap();
            for (e, s) in ds.examples().iter().zip(ds.diagnostic_symbols()) {
                assert!(t.program.evaluate(s).unwrap().approx_eq(&e.target));
            }
        }
    }

    #[test]
    fn mod2_never_divides_by_zero() {
        let t = TaskSpec::builtin("mod2").unwrap();
        let ds = synth_dataset(&t, 500, 0.0, 3).unwrap();
        assert!(ds.diagnostic_symbols().iter().all(|s| s[1] != SetValue::Discrete(0)));
    }

    #[test]
    fn noiseless_features_are_one_hot() {
        let t = TaskSpec::builtin("sum2").unwrap();
        let ds = synth_dataset(&t, 50, 0.0, 0).unwrap();
        for (e, s) in ds.examples().iter().zip(ds.diagnostic_symbols()) {
            for (f, v) in e.features.iter().zip(s) {
                assert_eq!(f[0], t.one_hot(v));
            }
        }
    }

    #[test]
    fn seeded() {
        let t = TaskSpec::builtin("sum2").unwrap();
        assert_eq!(synth_dataset(&t, 30, 0.3, 5).unwrap(), synth_dataset(&t, 30, 0.3, 5).unwrap());
        assert_ne!(synth_dataset(&t, 30, 0.3, 5).unwrap(), synth_dataset(&t, 30, 0.3, 6).unwrap());
        assert!(synth_dataset(&t, 0, 0.3, 5).is_err());
        assert!(synth_dataset(&t, 3, -1.0, 5).is_err());
    }

    #[test]
    fn hwf_counts_and_lengths() {
        let t = TaskSpec::builtin("hwf").unwrap();
        let counts = hwf_counts(0.01);
        assert_eq!(counts.iter().map(|c| c.1).sum::<usize>(), 100);
        let ds = hwf_dataset(&t, &counts, 0.3, 2).unwrap();
        assert_eq!(ds.len(), 100);
        let mut hist = std::collections::BTreeMap::new();
        for s in ds.diagnostic_symbols() {
            let SetValue::List(items) = &s[0] else { panic!() };
            *hist.entry(items.len()).or_insert(0) += 1;
            assert!(t.program.evaluate(s).is_ok());
        }
        assert_eq!(hist.into_iter().collect::<Vec<_>>(), vec![(1, 10), (3, 10), (5, 20), (7, 60)]);
        assert!(hwf_dataset(&t, &[(2, 1)], 0.3, 0).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["sum2", "hwf", "leaf"] {
            let t = TaskSpec::builtin(name).unwrap();
            let ds = synth_dataset(&t, 20, 0.3, 4).unwrap();
            let path = dir.path().join(format!("{name}.json"));
            save_dataset(&path, &t, &ds).unwrap();
            assert_eq!(load_dataset(&path, &t).unwrap(), ds);
        }
        let other = TaskSpec::builtin("sum3").unwrap();
        assert!(load_dataset(&dir.path().join("sum2.json"), &other).is_err());
    }
}
