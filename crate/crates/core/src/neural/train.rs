use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{AdamState, ForwardCache, Mlp, NeuralError};
use crate::bench::{evaluate, BenchError, Dataset, Example, InputLayout, Metrics, TaskSpec};
use crate::estimator::{
    indecater_grad, ised_grad, nasr_grad, reinforce_grad, EstimateError, SampleSummary,
};
use crate::mapping::{DistValue, Semiring, SetValue};
use crate::sampler::RandomnessKey;

/// Which gradient estimator drives training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum EstimatorChoice {
    Ised { semiring: Semiring },
    Reinforce,
    Indecater,
    Nasr,
}

impl EstimatorChoice {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorChoice::Ised { .. } => "ised",
            EstimatorChoice::Reinforce => "reinforce",
            EstimatorChoice::Indecater => "indecater",
            EstimatorChoice::Nasr => "nasr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub estimator: EstimatorChoice,
    /// Samples per example (base samples for IndeCateR, ignored by NASR).
    pub k: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            estimator: EstimatorChoice::Ised {
                semiring: Semiring::AddMult,
            },
            k: 100,
            epochs: 10,
            lr: 1e-3,
            batch_size: 16,
        }
    }
}

/// Per-epoch record. `train_loss` is the mean per-example loss of the
/// estimator: BCE for ISED, `−J` for REINFORCE and NASR, and the negated
/// expected-reward estimate for IndeCateR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// Program evaluations made by the estimator during this epoch.
    pub program_calls: u64,
    pub test: Metrics,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: Mlp,
    pub adam: AdamState,
    pub epochs: Vec<EpochMetrics>,
}

/// Model outputs for one example, with the caches needed to backpropagate.
#[derive(Debug, Clone)]
pub struct Perception {
    pub p_hat: Vec<DistValue>,
    /// Most likely symbols per input.
    pub argmax: Vec<SetValue>,
    caches: Vec<Vec<ForwardCache>>,
}

fn unit_value(heads: Vec<usize>) -> SetValue {
    if heads.len() == 1 {
        SetValue::Discrete(heads[0])
    } else {
        SetValue::Tuple(heads.into_iter().map(SetValue::Discrete).collect())
    }
}

/// Runs the shared model on every slot of every input.
pub fn perceive(model: &Mlp, task: &TaskSpec, features: &[Vec<Vec<f64>>]) -> Result<Perception, NeuralError> {
    if features.len() != task.layouts.len() {
        return Err(NeuralError::ShapeMismatch(format!(
            "{} inputs for a task with {}",
            features.len(),
            task.layouts.len()
        )));
    }
    let mut p_hat = Vec::with_capacity(features.len());
    let mut argmax = Vec::with_capacity(features.len());
    let mut caches = Vec::with_capacity(features.len());
    for (slots, layout) in features.iter().zip(&task.layouts) {
        let cs = slots.iter().map(|x| model.forward(x)).collect::<Result<Vec<_>, _>>()?;
        let mut dists: Vec<DistValue> = cs.iter().map(|c| model.dist(c)).collect();
        let mut picks: Vec<SetValue> = cs.iter().map(|c| unit_value(Mlp::argmax(c))).collect();
        match layout {
            InputLayout::Single => {
                if cs.len() != 1 {
                    return Err(NeuralError::ShapeMismatch("single input with several slots".into()));
                }
                p_hat.push(dists.pop().expect("one slot"));
                argmax.push(picks.pop().expect("one slot"));
            }
            InputLayout::List => {
                p_hat.push(DistValue::List(dists));
                argmax.push(SetValue::List(picks));
            }
        }
        caches.push(cs);
    }
    Ok(Perception { p_hat, argmax, caches })
}

/// Chains `∂loss/∂p̂` through every slot into `grad`.
pub fn backprop_perception(
    model: &Mlp,
    perception: &Perception,
    grad_p_hat: &[DistValue],
    grad: &mut Mlp,
) -> Result<(), NeuralError> {
    let heads = model.heads.len();
    for (cs, g) in perception.caches.iter().zip(grad_p_hat) {
        let rows = g.rows();
        if rows.len() != cs.len() * heads {
            return Err(NeuralError::ShapeMismatch("gradient rows per input".into()));
        }
        for (cache, slot_rows) in cs.iter().zip(rows.chunks(heads)) {
            let d: Vec<Vec<f64>> = slot_rows.iter().map(|r| r.to_vec()).collect();
            model.backward(cache, &d, grad)?;
        }
    }
    Ok(())
}

/// Loss and `∂loss/∂p̂` of one example under the chosen estimator. `None`
/// when no gradient signal exists (a Float task where every sample failed).
pub fn estimate(
    task: &TaskSpec,
    choice: EstimatorChoice,
    k: usize,
    p_hat: Vec<DistValue>,
    y: &SetValue,
    key: RandomnessKey,
) -> Result<Option<(f64, Vec<DistValue>)>, EstimateError> {
    let program = &task.program;
    Ok(match choice {
        EstimatorChoice::Ised { semiring } => {
            let summary = SampleSummary::draw(program, p_hat, k, key)?;
            match ised_grad(&summary, program.output_mapping(), semiring, y) {
                Ok(r) => Some((r.loss, r.grad_p_hat.expect("gradient requested"))),
                Err(EstimateError::EmptySummary) => None,
                Err(e) => return Err(e),
            }
        }
        EstimatorChoice::Reinforce => {
            let summary = SampleSummary::draw(program, p_hat, k, key)?;
            let r = reinforce_grad(&summary, y, None)?;
            Some((-r.objective, r.grad_p_hat))
        }
        EstimatorChoice::Nasr => {
            let r = nasr_grad(p_hat, program, y, key, None)?;
            Some((-r.objective, r.grad_p_hat))
        }
        EstimatorChoice::Indecater => {
            let r = indecater_grad(&p_hat, program, y, k, key, None)?;
            // Σ_c p̂[i][c]·grad[i][c] estimates −E[reward] for every row i
            let rows: Vec<&[f64]> = p_hat.iter().flat_map(|p| p.rows()).collect();
            let grows: Vec<&[f64]> = r.grad_p_hat.iter().flat_map(|g| g.rows()).collect();
            let loss = rows
                .iter()
                .zip(&grows)
                .map(|(p, g)| p.iter().zip(*g).map(|(a, b)| a * b).sum::<f64>())
                .sum::<f64>()
                / rows.len().max(1) as f64;
            Some((loss, r.grad_p_hat))
        }
    })
}

/// Trains a fresh model from `seed`. Example `i` of epoch `e` (in shuffled
/// order) samples under key `(seed, e·N + i)`; batch gradients are averaged
/// in example order. Evaluation on `test` follows every epoch.
pub fn train(
    task: &TaskSpec,
    cfg: &TrainConfig,
    train: &[Example],
    test: &Dataset,
    seed: u64,
) -> Result<TrainOutcome, NeuralError> {
    if train.is_empty() {
        return Err(BenchError::EmptyDataset.into());
    }
    if cfg.k == 0 || cfg.batch_size == 0 {
        return Err(NeuralError::ShapeMismatch("k and batch size must be positive".into()));
    }
    let input_dim = train[0]
        .features
        .first()
        .and_then(|f| f.first())
        .map_or(task.feature_dim(), Vec::len);
    let mut model = Mlp::new(input_dim, &task.hidden_sizes, task.head_spec(), seed)?;
    let mut adam = AdamState::new(&model, cfg.lr);
    let mut shuffle = ChaCha20Rng::seed_from_u64(seed);
    shuffle.set_stream(1);
    let n = train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let calls_before = task.program.call_count();
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut grad = model.zeros_like();
            for (j, &idx) in batch.iter().enumerate() {
                let ex = &train[idx];
                let position = (epoch * n + b * cfg.batch_size + j) as u64;
                let key = RandomnessKey::example(seed, position);
                let p = perceive(&model, task, &ex.features)?;
                let Some((loss, g)) = estimate(task, cfg.estimator, cfg.k, p.p_hat.clone(), &ex.target, key)? else {
                    continue;
                };
                loss_sum += loss;
                loss_count += 1;
                backprop_perception(&model, &p, &g, &mut grad)?;
            }
            let mut scaled = model.zeros_like();
            scaled.add_scaled(&grad, 1.0 / batch.len() as f64);
            adam.step(&mut model, &scaled)?;
        }
        let program_calls = task.program.call_count() - calls_before;
        let test_metrics = evaluate(&model, task, test)?;
        log::debug!(
            "{} epoch {}: loss {:.4}, accuracy {:.4}",
            task.name,
            epoch + 1,
            loss_sum / loss_count.max(1) as f64,
            test_metrics.task_accuracy
        );
        epochs.push(EpochMetrics {
            epoch: epoch + 1,
            train_loss: loss_sum / loss_count.max(1) as f64,
            program_calls,
            test: test_metrics,
        });
    }
    Ok(TrainOutcome {
        params: model,
        adam,
        epochs,
    })
}
