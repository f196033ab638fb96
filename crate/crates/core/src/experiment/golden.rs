//! The worked sum2 instance (digits 0–2): predicted distributions
//! `[0.1, 0.6, 0.3]` and `[0.2, 0.1, 0.7]`, ground truth `y = 3`, and the
//! three samples `(1, 2)`, `(1, 0)`, `(2, 1)`.

use super::ExperimentError;
use crate::blackbox::Program;
use crate::estimator::{exact_wmc, ised_forward, reinforce_grad, top1_proofs, SampleSummary};
use crate::mapping::{DistValue, Semiring, SetValue, StructuralMapping};

pub const GOLDEN_CASES: [&str; 5] = ["ised-addmult", "ised-minmax", "reinforce", "dpl", "scallop"];

pub fn sum2_small() -> Program {
    let d = StructuralMapping::integer(0, 2);
    Program::new(
        "sum2",
        vec![d.clone(), d],
        StructuralMapping::integer(0, 4),
        |xs: &[SetValue]| {
            let a = xs[0].as_discrete().unwrap_or(0);
            let b = xs[1].as_discrete().unwrap_or(0);
            Ok(SetValue::Discrete(a + b))
        },
    )
}

pub fn golden_p_hat() -> Vec<DistValue> {
    vec![
        DistValue::Discrete(vec![0.1, 0.6, 0.3]),
        DistValue::Discrete(vec![0.2, 0.1, 0.7]),
    ]
}

pub fn golden_summary() -> SampleSummary {
    let program = sum2_small();
    let r_hat: Vec<Vec<SetValue>> = [(1, 2), (1, 0), (2, 1)]
        .iter()
        .map(|&(a, b)| vec![SetValue::Discrete(a), SetValue::Discrete(b)])
        .collect();
    let y_hat = r_hat.iter().map(|r| program.evaluate(r)).collect();
    SampleSummary {
        input_mappings: program.input_mappings().to_vec(),
        p_hat: golden_p_hat(),
        r_hat,
        y_hat,
    }
}

/// The computed vector (or the one-element objective for `reinforce`).
pub fn golden(case: &str) -> Result<Vec<f64>, ExperimentError> {
    let y = SetValue::Discrete(3);
    let out = StructuralMapping::integer(0, 4);
    Ok(match case {
        "ised-addmult" => ised_forward(&golden_summary(), &out, Semiring::AddMult, &y)?.w_tilde,
        "ised-minmax" => ised_forward(&golden_summary(), &out, Semiring::MinMax, &y)?.w_tilde,
        "reinforce" => vec![reinforce_grad(&golden_summary(), &y, None)?.objective],
        "dpl" => exact_wmc(&sum2_small(), &golden_p_hat())?,
        "scallop" => top1_proofs(&sum2_small(), &golden_p_hat())?,
        other => return Err(ExperimentError::Config(format!("unknown golden case {other:?}"))),
    })
}
