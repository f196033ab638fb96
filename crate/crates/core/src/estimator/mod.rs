//! Gradient estimators for a perception model feeding a black-box program.
//!
//! Every estimator consumes the predicted input distributions `p̂` and
//! produces a gradient with the same shape as `p̂`. Chaining that gradient
//! through the perception model is the caller's job.

mod ised;
mod oracle;
mod score;

use thiserror::Error;

use crate::blackbox::{Program, ProgramResult};
use crate::mapping::{gather_positions, DistValue, MappingError, SetValue, Semiring, StructuralMapping};
use crate::sampler::{sample_batch, RandomnessKey, SampleError};

pub use ised::{bce_loss, ised_forward, ised_grad, IsedOptions, DEFAULT_OUTPUT_BOUND, PROB_CLAMP};
pub use oracle::{enumerate_support, exact_wmc, exhaustive_summary, top1_proofs, DEFAULT_INPUT_BOUND};
pub use score::{
    exact_match_reward, indecater_grad, nasr_grad, reinforce_grad, IndecaterResult,
    ReinforceResult, RewardFn,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("output space of {0} elements exceeds the enumeration bound")]
    OutputSpaceTooLarge(u128),
    #[error("input space of {0} tuples exceeds the enumeration bound")]
    InputSpaceTooLarge(u128),
    #[error("no sample produced a valid Float output")]
    EmptySummary,
    #[error("unsupported mapping for this estimator: {0}")]
    UnsupportedMapping(String),
    #[error("malformed sample summary: {0}")]
    Malformed(String),
}

/// The sampled stand-in for the program on one training example: `k` input
/// tuples and the outputs the program produced for them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub input_mappings: Vec<StructuralMapping>,
    pub p_hat: Vec<DistValue>,
    pub r_hat: Vec<Vec<SetValue>>,
    pub y_hat: Vec<ProgramResult>,
}

impl SampleSummary {
    /// Samples `k` input tuples from `p_hat` and runs the program on each.
    pub fn draw(
        program: &Program,
        p_hat: Vec<DistValue>,
        k: usize,
        key: RandomnessKey,
    ) -> Result<Self, EstimateError> {
        let r_hat = sample_batch(program.input_mappings(), &p_hat, k, key)?;
        let y_hat = r_hat.iter().map(|r| program.evaluate(r)).collect();
        Ok(SampleSummary {
            input_mappings: program.input_mappings().to_vec(),
            p_hat,
            r_hat,
            y_hat,
        })
    }

    pub fn k(&self) -> usize {
        self.r_hat.len()
    }

    fn check(&self) -> Result<(), EstimateError> {
        if self.r_hat.len() != self.y_hat.len() {
            return Err(EstimateError::Malformed(format!(
                "{} input tuples but {} outputs",
                self.r_hat.len(),
                self.y_hat.len()
            )));
        }
        if self.p_hat.len() != self.input_mappings.len() {
            return Err(EstimateError::Malformed(format!(
                "{} distributions for {} inputs",
                self.p_hat.len(),
                self.input_mappings.len()
            )));
        }
        Ok(())
    }

    /// All distribution rows of all inputs, in input order.
    pub(crate) fn flat_rows(&self) -> Vec<&[f64]> {
        self.p_hat.iter().flat_map(|p| p.rows()).collect()
    }

    /// For each sample, the `(row, column)` positions it selects in
    /// [`flat_rows`](Self::flat_rows).
    pub(crate) fn proofs(&self) -> Result<Vec<Vec<(usize, usize)>>, EstimateError> {
        self.check()?;
        let offsets: Vec<usize> = self
            .p_hat
            .iter()
            .scan(0, |acc, p| {
                let start = *acc;
                *acc += p.row_count();
                Some(start)
            })
            .collect();
        self.r_hat
            .iter()
            .map(|tuple| {
                if tuple.len() != self.input_mappings.len() {
                    return Err(EstimateError::Malformed("sample arity".into()));
                }
                let mut out = Vec::new();
                for (i, (m, v)) in self.input_mappings.iter().zip(tuple).enumerate() {
                    out.extend(
                        gather_positions(m, v, &self.p_hat[i])?
                            .into_iter()
                            .map(|(r, c)| (r + offsets[i], c)),
                    );
                }
                Ok(out)
            })
            .collect()
    }

    /// Scatters a gradient over flat rows back into the shape of `p_hat`.
    pub(crate) fn unflatten(&self, flat: &[Vec<f64>]) -> Vec<DistValue> {
        let mut grads: Vec<DistValue> = self.p_hat.iter().map(DistValue::zeros_like).collect();
        let mut src = flat.iter();
        for g in grads.iter_mut() {
            for row in g.rows_mut() {
                row.copy_from_slice(src.next().expect("row count matches"));
            }
        }
        grads
    }
}

/// Loss, intermediate vectors and (optionally) `∂loss/∂p̂` for one example.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Unnormalized accumulations ω(y_l) per output slot.
    pub w_tilde: Vec<f64>,
    /// `w_tilde` scaled to unit L2 norm (all zero if `w_tilde` is).
    pub w_hat: Vec<f64>,
    /// Vectorized ground truth, aligned with `w_tilde`.
    pub w: Vec<f64>,
    pub loss: f64,
    pub grad_p_hat: Option<Vec<DistValue>>,
}

/// ⊗ over the selected probabilities of one proof.
pub(crate) fn proof_weight(rows: &[&[f64]], proof: &[(usize, usize)], s: Semiring) -> f64 {
    proof
        .iter()
        .map(|&(r, c)| rows[r][c])
        .fold(s.one(), |acc, x| s.times(acc, x))
}

/// ω(y_l, ŷ, r̂, p̂): ⊕ over samples whose output equals `yl` of the ⊗ of
/// their input probabilities. Failed samples match nothing; the empty ⊕ is 0.
pub fn accumulate(yl: &SetValue, summary: &SampleSummary, s: Semiring) -> Result<f64, EstimateError> {
    let proofs = summary.proofs()?;
    let rows = summary.flat_rows();
    Ok(summary
        .y_hat
        .iter()
        .zip(&proofs)
        .filter(|(y, _)| matches!(y, Ok(v) if v.approx_eq(yl)))
        .map(|(_, proof)| proof_weight(&rows, proof, s))
        .fold(s.zero(), |acc, x| s.plus(acc, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::builtin;

    pub(crate) fn worked_summary() -> SampleSummary {
        let p = builtin("sum2").unwrap();
        let d = StructuralMapping::integer(0, 2);
        let sum = crate::blackbox::Program::new(
            "sum2-012",
            vec![d.clone(), d],
            StructuralMapping::integer(0, 4),
            move |xs: &[SetValue]| p.evaluate(xs),
        );
        let tuples = [(1, 2), (1, 0), (2, 1)];
        let r_hat: Vec<Vec<SetValue>> = tuples
            .iter()
            .map(|&(a, b)| vec![SetValue::Discrete(a), SetValue::Discrete(b)])
            .collect();
        let y_hat = r_hat.iter().map(|r| sum.evaluate(r)).collect();
        SampleSummary {
            input_mappings: sum.input_mappings().to_vec(),
            p_hat: vec![
                DistValue::Discrete(vec![0.1, 0.6, 0.3]),
                DistValue::Discrete(vec![0.2, 0.1, 0.7]),
            ],
            r_hat,
            y_hat,
        }
    }

    #[test]
    fn accumulate_examples() {
        let s = worked_summary();
        let v = accumulate(&SetValue::Discrete(3), &s, Semiring::AddMult).unwrap();
        assert!((v - (0.6 * 0.7 + 0.3 * 0.1)).abs() < 1e-12);
        assert_eq!(accumulate(&SetValue::Discrete(0), &s, Semiring::AddMult).unwrap(), 0.0);
        assert_eq!(accumulate(&SetValue::Discrete(3), &s, Semiring::MinMax).unwrap(), 0.6);
    }

    #[test]
    fn accumulate_min_max_formula_example() {
        // Two proofs of 9.0 with probabilities [0.3, 0.8, 0.8] and [0.1, 0.1, 0.1].
        let m = crate::blackbox::hwf::input_mapping();
        let sym = |t: &str| crate::blackbox::hwf::parse(t).unwrap();
        let a = sym("7+2");
        let b = sym("3*3");
        // one p̂ in which each proof reads its stated probabilities
        let mut rows = vec![vec![0.0; 14]; 3];
        for (i, (&sa, &sb)) in a.iter().zip(&b).enumerate() {
            rows[i][sa] = [0.3, 0.8, 0.8][i];
            rows[i][sb] = 0.1;
        }
        let p_hat = DistValue::List(rows.into_iter().map(DistValue::Discrete).collect());
        let hwf = builtin("hwf").unwrap();
        let r_hat: Vec<Vec<SetValue>> = [a, b]
            .iter()
            .map(|f| vec![SetValue::List(f.iter().map(|&x| SetValue::Discrete(x)).collect())])
            .collect();
        let y_hat = r_hat.iter().map(|r| hwf.evaluate(r)).collect();
        let summary = SampleSummary {
            input_mappings: vec![m],
            p_hat: vec![p_hat],
            r_hat,
            y_hat,
        };
        let v = accumulate(&SetValue::Float(9.0), &summary, Semiring::MinMax).unwrap();
        assert_eq!(v, 0.3);
    }

    #[test]
    fn malformed_summary() {
        let mut s = worked_summary();
        s.y_hat.pop();
        assert!(matches!(
            accumulate(&SetValue::Discrete(3), &s, Semiring::AddMult),
            Err(EstimateError::Malformed(_))
        ));
    }
}
