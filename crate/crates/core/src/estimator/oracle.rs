//! Exhaustive enumeration references: exact weighted model counting and
//! top-1-proof scoring over the full input space.

use super::{EstimateError, SampleSummary};
use crate::blackbox::Program;
use crate::mapping::{
    aggregate, enumerate_set, rank, DistValue, MappingError, Semiring, SetValue, StructuralMapping,
};

pub const DEFAULT_INPUT_BOUND: u128 = 1_000_000;

fn support_size(m: &StructuralMapping, p: &DistValue) -> Result<u128, EstimateError> {
    let mismatch = || EstimateError::Mapping(MappingError::ShapeMismatch(format!("{m}")));
    Ok(match (m, p) {
        (StructuralMapping::Discrete { alphabet }, DistValue::Discrete(_)) => alphabet.len() as u128,
        (StructuralMapping::Permutation { n }, DistValue::Perm(_)) => {
            (1..=*n as u128).fold(1u128, |a, b| a.saturating_mul(b))
        }
        (StructuralMapping::Tuple { members }, DistValue::Tuple(ds)) if members.len() == ds.len() => {
            let mut total = 1u128;
            for (mm, d) in members.iter().zip(ds) {
                total = total.saturating_mul(support_size(mm, d)?);
            }
            total
        }
        (StructuralMapping::List { element, .. }, DistValue::List(ds)) => {
            let mut total = 1u128;
            for d in ds {
                total = total.saturating_mul(support_size(element, d)?);
            }
            total
        }
        (StructuralMapping::Float, _) => return Err(MappingError::InfiniteMapping.into()),
        _ => return Err(mismatch()),
    })
}

fn support(m: &StructuralMapping, p: &DistValue) -> Result<Vec<SetValue>, EstimateError> {
    Ok(match (m, p) {
        (StructuralMapping::Tuple { members }, DistValue::Tuple(ds)) => {
            let parts = members
                .iter()
                .zip(ds)
                .map(|(mm, d)| support(mm, d))
                .collect::<Result<Vec<_>, _>>()?;
            cartesian(&parts).into_iter().map(SetValue::Tuple).collect()
        }
        (StructuralMapping::List { element, .. }, DistValue::List(ds)) => {
            let parts = ds
                .iter()
                .map(|d| support(element, d))
                .collect::<Result<Vec<_>, _>>()?;
            cartesian(&parts).into_iter().map(SetValue::List).collect()
        }
        _ => enumerate_set(m)?,
    })
}

fn cartesian(parts: &[Vec<SetValue>]) -> Vec<Vec<SetValue>> {
    parts.iter().fold(vec![Vec::new()], |acc, part| {
        acc.iter()
            .flat_map(|prefix| {
                part.iter().map(move |v| {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect()
    })
}

/// Every input tuple the distributions can produce, once each, in canonical
/// product order. Lists take the length of their distribution.
pub fn enumerate_support(
    ms: &[StructuralMapping],
    p_hat: &[DistValue],
    bound: u128,
) -> Result<Vec<Vec<SetValue>>, EstimateError> {
    if ms.len() != p_hat.len() {
        return Err(EstimateError::Malformed("arity".into()));
    }
    let mut size = 1u128;
    for (m, p) in ms.iter().zip(p_hat) {
        size = size.saturating_mul(support_size(m, p)?);
    }
    if size > bound {
        return Err(EstimateError::InputSpaceTooLarge(size));
    }
    let parts = ms
        .iter()
        .zip(p_hat)
        .map(|(m, p)| support(m, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cartesian(&parts))
}

/// A summary holding every input tuple exactly once, as if sampling had
/// enumerated the whole support.
pub fn exhaustive_summary(
    program: &Program,
    p_hat: Vec<DistValue>,
    bound: u128,
) -> Result<SampleSummary, EstimateError> {
    let r_hat = enumerate_support(program.input_mappings(), &p_hat, bound)?;
    let y_hat = r_hat.iter().map(|r| program.evaluate(r)).collect();
    Ok(SampleSummary {
        input_mappings: program.input_mappings().to_vec(),
        p_hat,
        r_hat,
        y_hat,
    })
}

fn proof_scores(
    program: &Program,
    p_hat: &[DistValue],
    combine: impl Fn(f64, f64) -> f64,
) -> Result<Vec<f64>, EstimateError> {
    let out = program.output_mapping();
    let outputs = enumerate_set(out)?;
    let tuple = program.input_tuple_mapping();
    let p_tuple = DistValue::Tuple(p_hat.to_vec());
    let mut scores = vec![0.0; outputs.len()];
    for r in enumerate_support(program.input_mappings(), p_hat, DEFAULT_INPUT_BOUND)? {
        let Ok(y) = program.evaluate(&r) else { continue };
        let Some(l) = rank(out, &y) else { continue };
        let weight = aggregate(&tuple, &SetValue::Tuple(r), &p_tuple, Semiring::AddMult)?;
        scores[l] = combine(scores[l], weight);
    }
    Ok(scores)
}

/// Exact probability of each output: the sum over all input tuples that
/// produce it of their product probabilities.
pub fn exact_wmc(program: &Program, p_hat: &[DistValue]) -> Result<Vec<f64>, EstimateError> {
    proof_scores(program, p_hat, |a, b| a + b)
}

/// Probability of the single most likely proof of each output.
pub fn top1_proofs(program: &Program, p_hat: &[DistValue]) -> Result<Vec<f64>, EstimateError> {
    proof_scores(program, p_hat, f64::max)
}
