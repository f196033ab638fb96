use serde::{Deserialize, Serialize};

use super::{BenchError, Dataset, TaskSpec};
use crate::mapping::SetValue;
use crate::neural::{perceive, Mlp};

/// Held-out metrics. `mean_loss` is the mean negative log-likelihood the model
/// assigns to the hidden symbols, per head; it is diagnostic, like
/// `symbol_accuracy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub task_accuracy: f64,
    pub symbol_accuracy: f64,
    pub mean_loss: f64,
    pub examples: usize,
}

fn leaves(v: &SetValue, out: &mut Vec<usize>) {
    match v {
        SetValue::Discrete(c) => out.push(*c),
        SetValue::Tuple(vs) | SetValue::List(vs) => vs.iter().for_each(|x| leaves(x, out)),
        SetValue::Float(_) | SetValue::Perm(_) => {}
    }
}

/// Argmax symbols per head (lowest index on ties), one program call per
/// example. Program errors count as wrong answers.
pub fn evaluate(model: &Mlp, task: &TaskSpec, ds: &Dataset) -> Result<Metrics, BenchError> {
    if ds.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    let mut correct = 0usize;
    let mut symbols_right = 0usize;
    let mut symbols_total = 0usize;
    let mut nll = 0.0;
    for (e, hidden) in ds.examples().iter().zip(ds.diagnostic_symbols()) {
        let p = perceive(model, task, &e.features).map_err(|err| BenchError::Model(err.to_string()))?;
        if matches!(task.program.evaluate(&p.argmax), Ok(y) if y.approx_eq(&e.target)) {
            correct += 1;
        }
        let mut truth = Vec::new();
        hidden.iter().for_each(|v| leaves(v, &mut truth));
        let mut guess = Vec::new();
        p.argmax.iter().for_each(|v| leaves(v, &mut guess));
        let rows: Vec<&[f64]> = p.p_hat.iter().flat_map(|d| d.rows()).collect();
        for ((t, g), row) in truth.iter().zip(&guess).zip(&rows) {
            symbols_total += 1;
            symbols_right += (t == g) as usize;
            nll -= row[*t].max(f64::MIN_POSITIVE).ln();
        }
    }
    let n = ds.len() as f64;
    Ok(Metrics {
        task_accuracy: correct as f64 / n,
        symbol_accuracy: symbols_right as f64 / symbols_total.max(1) as f64,
        mean_loss: nll / symbols_total.max(1) as f64,
        examples: ds.len(),
    })
}
