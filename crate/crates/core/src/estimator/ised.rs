//! The Estimate step of ISED: accumulate, normalize, compare to the
//! vectorized ground truth, and differentiate back to `p̂`.

use super::{proof_weight, EstimateError, EstimateResult, SampleSummary};
use crate::mapping::{
    cardinality, floats_match, rank, Cardinality, MappingError, SetValue, Semiring,
    StructuralMapping,
};

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]` inside the loss.
pub const PROB_CLAMP: f64 = 1e-7;
pub const DEFAULT_OUTPUT_BOUND: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsedOptions {
    pub semiring: Semiring,
    /// Largest finite output space that will be enumerated.
    pub output_bound: u128,
}

impl IsedOptions {
    pub fn new(semiring: Semiring) -> Self {
        IsedOptions {
            semiring,
            output_bound: DEFAULT_OUTPUT_BOUND,
        }
    }
}

impl From<Semiring> for IsedOptions {
    fn from(s: Semiring) -> Self {
        IsedOptions::new(s)
    }
}

/// Mean binary cross-entropy with clamped predictions, and its gradient with
/// respect to `pred` (zero where clamping is active).
pub fn bce_loss(pred: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let n = pred.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let c = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= t * c.ln() + (1.0 - t) * (1.0 - c).ln();
        grad.push(if p > PROB_CLAMP && p < 1.0 - PROB_CLAMP {
            -(t / p - (1.0 - t) / (1.0 - p)) / n
        } else {
            0.0
        });
    }
    (loss / n, grad)
}

/// Which samples feed each output slot.
struct Layout {
    /// sample indices per slot, ascending
    slots: Vec<Vec<usize>>,
    target: Vec<f64>,
}

fn layout(
    summary: &SampleSummary,
    out: &StructuralMapping,
    y: &SetValue,
    bound: u128,
) -> Result<Layout, EstimateError> {
    if !crate::mapping::conforms(out, y) {
        return Err(MappingError::NonConforming(format!("{out}")).into());
    }
    match cardinality(out) {
        Cardinality::Finite(n) => {
            if n > bound {
                return Err(EstimateError::OutputSpaceTooLarge(n));
            }
            let n = n as usize;
            let mut slots = vec![Vec::new(); n];
            for (j, yj) in summary.y_hat.iter().enumerate() {
                if let Ok(v) = yj {
                    if let Some(l) = rank(out, v) {
                        slots[l].push(j);
                    }
                }
            }
            let mut target = vec![0.0; n];
            target[rank(out, y).expect("conforming value has a rank")] = 1.0;
            Ok(Layout { slots, target })
        }
        Cardinality::Infinite => {
            // One slot per valid sample, duplicates kept.
            let valid: Vec<(usize, &SetValue)> = summary
                .y_hat
                .iter()
                .enumerate()
                .filter_map(|(j, r)| r.as_ref().ok().map(|v| (j, v)))
                .collect();
            if valid.is_empty() {
                return Err(EstimateError::EmptySummary);
            }
            let slots = valid
                .iter()
                .map(|(_, yl)| {
                    valid
                        .iter()
                        .filter(|(_, yj)| yj.approx_eq(yl))
                        .map(|(j, _)| *j)
                        .collect()
                })
                .collect();
            let target = match y {
                SetValue::Float(t) => valid
                    .iter()
                    .map(|(_, v)| match v {
                        SetValue::Float(x) if floats_match(*t, *x) => 1.0,
                        _ => 0.0,
                    })
                    .collect(),
                _ => valid
                    .iter()
                    .map(|(_, v)| if v.approx_eq(y) { 1.0 } else { 0.0 })
                    .collect(),
            };
            Ok(Layout { slots, target })
        }
    }
}

fn normalize(w_tilde: &[f64]) -> (Vec<f64>, f64) {
    let norm = w_tilde.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        (vec![0.0; w_tilde.len()], 0.0)
    } else {
        (w_tilde.iter().map(|x| x / norm).collect(), norm)
    }
}

/// Index of the ⊕-winning (max) element, lowest index on ties.
fn argmax_first(values: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

fn run(
    summary: &SampleSummary,
    out: &StructuralMapping,
    opts: IsedOptions,
    y: &SetValue,
    want_grad: bool,
) -> Result<EstimateResult, EstimateError> {
    let s = opts.semiring;
    let proofs = summary.proofs()?;
    let rows = summary.flat_rows();
    let weights: Vec<f64> = proofs.iter().map(|p| proof_weight(&rows, p, s)).collect();
    let Layout { slots, target } = layout(summary, out, y, opts.output_bound)?;

    let w_tilde: Vec<f64> = slots
        .iter()
        .map(|js| js.iter().fold(s.zero(), |acc, &j| s.plus(acc, weights[j])))
        .collect();
    let (w_hat, norm) = normalize(&w_tilde);
    let (loss, d_w_hat) = bce_loss(&w_hat, &target);

    let grad_p_hat = want_grad.then(|| {
        let mut flat: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        if norm == 0.0 {
            return summary.unflatten(&flat);
        }
        // through L2 normalization
        let dot: f64 = d_w_hat.iter().zip(&w_hat).map(|(g, w)| g * w).sum();
        let d_w_tilde: Vec<f64> = d_w_hat
            .iter()
            .zip(&w_hat)
            .map(|(g, w)| (g - w * dot) / norm)
            .collect();
        // through ⊕
        let mut d_weight = vec![0.0; weights.len()];
        for (js, &g) in slots.iter().zip(&d_w_tilde) {
            if g == 0.0 {
                continue;
            }
            match s {
                Semiring::AddMult => js.iter().for_each(|&j| d_weight[j] += g),
                Semiring::MinMax => {
                    if let Some(j) = argmax_first(js.iter().map(|&j| (j, weights[j]))) {
                        d_weight[j] += g;
                    }
                }
            }
        }
        // through ⊗ and the gather from p̂
        for (proof, &g) in proofs.iter().zip(&d_weight) {
            if g == 0.0 || proof.is_empty() {
                continue;
            }
            let vals: Vec<f64> = proof.iter().map(|&(r, c)| rows[r][c]).collect();
            match s {
                Semiring::AddMult => {
                    // products of all other factors via prefix/suffix scans
                    let mut suffix = vec![1.0; vals.len() + 1];
                    for t in (0..vals.len()).rev() {
                        suffix[t] = suffix[t + 1] * vals[t];
                    }
                    let mut prefix = 1.0;
                    for (t, &(r, c)) in proof.iter().enumerate() {
                        flat[r][c] += g * prefix * suffix[t + 1];
                        prefix *= vals[t];
                    }
                }
                Semiring::MinMax => {
                    let mut best = 0;
                    for t in 1..vals.len() {
                        if vals[t] < vals[best] {
                            best = t;
                        }
                    }
                    let (r, c) = proof[best];
                    flat[r][c] += g;
                }
            }
        }
        summary.unflatten(&flat)
    });

    Ok(EstimateResult {
        w_tilde,
        w_hat,
        w: target,
        loss,
        grad_p_hat,
    })
}

/// Loss of one example: `BCE(normalize(ω), δ(y, ŷ))`, without the gradient.
///
/// Finite outputs are indexed by [`enumerate_set`](crate::mapping::enumerate_set)
/// order and the target is one-hot at the rank of `y`. Float outputs get one
/// slot per successful sample.
pub fn ised_forward(
    summary: &SampleSummary,
    out: &StructuralMapping,
    opts: impl Into<IsedOptions>,
    y: &SetValue,
) -> Result<EstimateResult, EstimateError> {
    run(summary, out, opts.into(), y, false)
}

/// [`ised_forward`] plus `∂loss/∂p̂`, treating sampled symbols and program
/// outputs as constants. Min-max routes each subgradient to the first
/// arg-selected element.
pub fn ised_grad(
    summary: &SampleSummary,
    out: &StructuralMapping,
    opts: impl Into<IsedOptions>,
    y: &SetValue,
) -> Result<EstimateResult, EstimateError> {
    run(summary, out, opts.into(), y, true)
}
