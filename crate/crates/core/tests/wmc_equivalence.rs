mod common;

use common::{criteria, random_dist_for, rng};
use ised::mapping::SetValue;
use ised::estimator::{enumerate_support, exact_wmc, exhaustive_summary, ised_forward, top1_proofs};
use ised::mapping::{DistValue, Semiring};

#[test]
fn exhaustive_addmult_equals_exact_wmc() {
    criteria::wmc_equivalence(100).unwrap();
}

#[test]
fn exhaustive_minmax_equals_top1_proofs() {
    // a proof's smallest factor bounds its product from above, and the best
    // proof never outweighs the sum over all proofs
    let mut r = rng(4);
    for program in criteria::small_builtins() {
        let p_hat: Vec<DistValue> = program.input_mappings().iter().map(|m| random_dist_for(m, &mut r)).collect();
        let exact = exact_wmc(&program, &p_hat).unwrap();
        let top = top1_proofs(&program, &p_hat).unwrap();
        for (t, e) in top.iter().zip(&exact) {
            assert!(t <= &(e + 1e-15), "{}: {top:?} vs {exact:?}", program.name());
        }
        let s = exhaustive_summary(&program, p_hat, 10_000).unwrap();
        let y = s.y_hat.iter().flatten().next().cloned().unwrap();
        let mm = ised_forward(&s, program.output_mapping(), Semiring::MinMax, &y).unwrap().w_tilde;
        for (m, t) in mm.iter().zip(&top) {
            // a nonzero exact count has a proof, so min-max sees it too
            assert_eq!(*m > 0.0, *t > 0.0, "{}", program.name());
            assert!(m >= t, "{}: min-max {m} below top-1 proof {t}", program.name());
        }
    }
}

#[test]
fn exact_wmc_is_a_distribution() {
    let mut r = rng(5);
    for program in criteria::small_builtins() {
        let p_hat: Vec<DistValue> = program.input_mappings().iter().map(|m| random_dist_for(m, &mut r)).collect();
        let total: f64 = exact_wmc(&program, &p_hat).unwrap().iter().sum();
        // mass of tuples the program rejects (mod2 by zero, say)
        let failed: f64 = enumerate_support(program.input_mappings(), &p_hat, 10_000)
            .unwrap()
            .iter()
            .filter(|t| program.evaluate(t).is_err())
            .map(|t| weight(t, &p_hat))
            .sum();
        assert!((total + failed - 1.0).abs() < 1e-12, "{}: {total} + {failed}", program.name());
    }
}

/// Product of the probabilities a tuple selects, recursing through tuples,
/// lists and permutation rows.
fn weight(tuple: &[SetValue], p_hat: &[DistValue]) -> f64 {
    fn w(v: &SetValue, d: &DistValue) -> f64 {
        match (v, d) {
            (SetValue::Discrete(c), DistValue::Discrete(row)) => row[*c],
            (SetValue::Tuple(vs), DistValue::Tuple(ds)) | (SetValue::List(vs), DistValue::List(ds)) => {
                vs.iter().zip(ds).map(|(v, d)| w(v, d)).product()
            }
            (SetValue::Perm(p), DistValue::Perm(rows)) => p.iter().zip(rows).map(|(c, r)| r[c - 1]).product(),
            other => panic!("unexpected pair {other:?}"),
        }
    }
    tuple.iter().zip(p_hat).map(|(v, d)| w(v, d)).product()
}
