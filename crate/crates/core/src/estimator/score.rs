//! Score-function baselines: REINFORCE, its single-sample NASR variant, and
//! IndeCateR.

use std::collections::HashMap;

use super::{EstimateError, SampleSummary};
use crate::blackbox::{Program, ProgramResult};
use crate::mapping::{DistValue, SetValue, StructuralMapping};
use crate::sampler::{sample_batch, RandomnessKey};

/// Reward of one program outcome against the ground truth.
pub type RewardFn<'a> = &'a dyn Fn(&ProgramResult, &SetValue) -> f64;

/// 1 if the program succeeded and its output equals `y`, else 0.
pub fn exact_match_reward(outcome: &ProgramResult, y: &SetValue) -> f64 {
    match outcome {
        Ok(v) if v.approx_eq(y) => 1.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReinforceResult {
    /// `J = (1/k) Σ_j log p̂(r̂_j) · reward_j`.
    pub objective: f64,
    pub mean_reward: f64,
    /// `∂(−J)/∂p̂`.
    pub grad_p_hat: Vec<DistValue>,
}

/// REINFORCE on a drawn summary. The log-probability of a sample is the sum
/// of the log-probabilities of the symbols it selects.
pub fn reinforce_grad(
    summary: &SampleSummary,
    y: &SetValue,
    reward: Option<RewardFn<'_>>,
) -> Result<ReinforceResult, EstimateError> {
    let reward = reward.unwrap_or(&exact_match_reward);
    let proofs = summary.proofs()?;
    let rows = summary.flat_rows();
    let k = summary.k();
    if k == 0 {
        return Err(EstimateError::Malformed("no samples".into()));
    }
    let inv_k = 1.0 / k as f64;
    let mut flat: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut objective = 0.0;
    let mut total_reward = 0.0;
    for (proof, outcome) in proofs.iter().zip(&summary.y_hat) {
        let rj = reward(outcome, y);
        total_reward += rj;
        if rj == 0.0 {
            continue;
        }
        let log_p: f64 = proof.iter().map(|&(r, c)| rows[r][c].ln()).sum();
        objective += inv_k * log_p * rj;
        for &(r, c) in proof {
            flat[r][c] -= inv_k * rj / rows[r][c];
        }
    }
    Ok(ReinforceResult {
        objective,
        mean_reward: total_reward * inv_k,
        grad_p_hat: summary.unflatten(&flat),
    })
}

/// REINFORCE with a single sample drawn under `key`.
pub fn nasr_grad(
    p_hat: Vec<DistValue>,
    program: &Program,
    y: &SetValue,
    key: RandomnessKey,
    reward: Option<RewardFn<'_>>,
) -> Result<ReinforceResult, EstimateError> {
    let summary = SampleSummary::draw(program, p_hat, 1, key)?;
    reinforce_grad(&summary, y, reward)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndecaterResult {
    /// `−∂E[reward]/∂p̂` estimate.
    pub grad_p_hat: Vec<DistValue>,
    /// Distinct program evaluations performed.
    pub program_calls: usize,
}

fn check_discrete_only(m: &StructuralMapping) -> Result<(), EstimateError> {
    match m {
        StructuralMapping::Discrete { .. } => Ok(()),
        StructuralMapping::Tuple { members } => members.iter().try_for_each(check_discrete_only),
        StructuralMapping::List { element, .. } => check_discrete_only(element),
        other => Err(EstimateError::UnsupportedMapping(format!("{other}"))),
    }
}

/// Discrete leaves of a value in depth-first order.
fn leaves(v: &SetValue, out: &mut Vec<usize>) {
    match v {
        SetValue::Discrete(i) => out.push(*i),
        SetValue::Tuple(vs) | SetValue::List(vs) => vs.iter().for_each(|x| leaves(x, out)),
        SetValue::Float(_) | SetValue::Perm(_) => unreachable!("checked discrete-only"),
    }
}

/// Rebuilds a value of the same shape as `template` from leaf indices.
fn rebuild(template: &SetValue, leaves: &mut impl Iterator<Item = usize>) -> SetValue {
    match template {
        SetValue::Discrete(_) => SetValue::Discrete(leaves.next().expect("leaf count")),
        SetValue::Tuple(vs) => SetValue::Tuple(vs.iter().map(|x| rebuild(x, leaves)).collect()),
        SetValue::List(vs) => SetValue::List(vs.iter().map(|x| rebuild(x, leaves)).collect()),
        SetValue::Float(_) | SetValue::Perm(_) => unreachable!("checked discrete-only"),
    }
}

/// IndeCateR: for each of `k` base samples and each discrete dimension `i`,
/// every symbol `c` of that dimension is substituted in turn, giving
/// `∂E/∂p̂[i][c] ≈ (1/k) Σ_j reward(P(r̂_j[i ← c]))`.
///
/// Program calls are memoized within one invocation, so the budget is at most
/// `k·(1 + Σ_i |Σ_i|)` minus duplicates.
pub fn indecater_grad(
    p_hat: &[DistValue],
    program: &Program,
    y: &SetValue,
    k: usize,
    key: RandomnessKey,
    reward: Option<RewardFn<'_>>,
) -> Result<IndecaterResult, EstimateError> {
    let reward = reward.unwrap_or(&exact_match_reward);
    program.input_mappings().iter().try_for_each(check_discrete_only)?;
    let base = sample_batch(program.input_mappings(), p_hat, k, key)?;

    let rows: Vec<&[f64]> = p_hat.iter().flat_map(|p| p.rows()).collect();
    let mut flat: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut score = |assignment: &[usize], template: &[SetValue]| -> f64 {
        if let Some(&r) = memo.get(assignment) {
            return r;
        }
        let mut it = assignment.iter().copied();
        let inputs: Vec<SetValue> = template.iter().map(|t| rebuild(t, &mut it)).collect();
        let r = reward(&program.evaluate(&inputs), y);
        memo.insert(assignment.to_vec(), r);
        r
    };

    let inv_k = 1.0 / k as f64;
    for draw in &base {
        let mut assignment = Vec::with_capacity(rows.len());
        draw.iter().for_each(|v| leaves(v, &mut assignment));
        debug_assert_eq!(assignment.len(), rows.len());
        score(&assignment, draw);
        for dim in 0..rows.len() {
            let original = assignment[dim];
            for c in 0..rows[dim].len() {
                assignment[dim] = c;
                flat[dim][c] -= inv_k * score(&assignment, draw);
            }
            assignment[dim] = original;
        }
    }
    let program_calls = memo.len();

    let mut grad_p_hat: Vec<DistValue> = p_hat.iter().map(DistValue::zeros_like).collect();
    let mut src = flat.into_iter();
    for g in grad_p_hat.iter_mut() {
        for row in g.rows_mut() {
            *row = src.next().expect("row count");
        }
    }
    Ok(IndecaterResult {
        grad_p_hat,
        program_calls,
    })
}
