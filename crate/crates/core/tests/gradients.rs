mod common;

use common::criteria::{self, ChainEstimator};
use ised::mapping::Semiring;

#[test]
fn ised_grad_addmult_matches_finite_differences() {
    let rep = criteria::ised_grad_fidelity(Semiring::AddMult, 100, 21).unwrap();
    assert!(rep.max_rel_err <= 1e-4, "{rep:?}");
}

#[test]
fn ised_grad_minmax_matches_finite_differences() {
    let rep = criteria::ised_grad_fidelity(Semiring::MinMax, 100, 22).unwrap();
    assert!(rep.max_rel_err <= 1e-4, "{rep:?}");
}

#[test]
fn full_chain_matches_finite_differences() {
    for est in [
        ChainEstimator::Ised(Semiring::AddMult),
        ChainEstimator::Ised(Semiring::MinMax),
        ChainEstimator::Reinforce,
    ] {
        let rep = criteria::chain_fidelity(est, 20, 23).unwrap();
        assert!(rep.max_rel_err <= 1e-3, "{est:?}: {rep:?}");
    }
}

#[test]
fn tie_detection() {
    use ised::estimator::SampleSummary;
    use ised::experiment::sum2_small;
    use ised::mapping::{DistValue, SetValue};
    let p = sum2_small();
    let pair = |a, b| vec![SetValue::Discrete(a), SetValue::Discrete(b)];
    let summary = |p_hat: Vec<DistValue>, r_hat: Vec<Vec<SetValue>>| {
        let y_hat = r_hat.iter().map(|r| p.evaluate(r)).collect();
        SampleSummary { input_mappings: p.input_mappings().to_vec(), p_hat, r_hat, y_hat }
    };
    let d = |v: [f64; 3]| DistValue::Discrete(v.to_vec());
    // (0,2) and (2,0) both give 2 with weight min(0.3, 0.3)
    assert!(criteria::minmax_tie(&summary(vec![d([0.3, 0.4, 0.3]), d([0.3, 0.4, 0.3])], vec![pair(0, 2), pair(2, 0)])));
    // the same proof twice is not ambiguous
    assert!(!criteria::minmax_tie(&summary(vec![d([0.1, 0.6, 0.3]), d([0.2, 0.1, 0.7])], vec![pair(1, 2), pair(1, 2)])));
}
