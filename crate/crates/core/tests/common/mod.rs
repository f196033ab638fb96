//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod criteria;

use ised::mapping::{DistValue, SetValue, StructuralMapping};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random strictly positive distribution of length `n`.
pub fn random_row(n: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_dist(n: usize, rng: &mut ChaCha20Rng) -> DistValue {
    DistValue::Discrete(random_row(n, rng))
}

pub fn digits(xs: &[usize]) -> Vec<SetValue> {
    xs.iter().map(|&x| SetValue::Discrete(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    Value(f64),
    DivideByZero,
    Syntax,
}

/// Dijkstra's shunting-yard over formula symbols (0–9 digits, 10 `+`,
/// 11 `-`, 12 `*`, 13 `/`), evaluating the postfix form with a stack.
pub fn shunting_yard(symbols: &[usize]) -> Oracle {
    fn prec(op: usize) -> u8 {
        if op >= 12 {
            2
        } else {
            1
        }
    }
    // syntax: digit (op digit)*
    if symbols.is_empty() || symbols.len().is_multiple_of(2) {
        return Oracle::Syntax;
    }
    for (i, &s) in symbols.iter().enumerate() {
        if (i % 2 == 0) != (s <= 9) {
            return Oracle::Syntax;
        }
    }
    let mut output: Vec<Result<f64, usize>> = Vec::new();
    let mut ops: Vec<usize> = Vec::new();
    for &s in symbols {
        if s <= 9 {
            output.push(Ok(s as f64));
        } else {
            while let Some(&top) = ops.last() {
                if prec(top) >= prec(s) {
                    output.push(Err(ops.pop().unwrap()));
                } else {
                    break;
                }
            }
            ops.push(s);
        }
    }
    while let Some(op) = ops.pop() {
        output.push(Err(op));
    }
    let mut stack: Vec<f64> = Vec::new();
    for t in output {
        match t {
            Ok(v) => stack.push(v),
            Err(op) => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(match op {
                    10 => a + b,
                    11 => a - b,
                    12 => a * b,
                    _ => {
                        if b == 0.0 {
                            return Oracle::DivideByZero;
                        }
                        a / b
                    }
                });
            }
        }
    }
    Oracle::Value(stack[0])
}

/// Random alternating formula of odd length `len`.
pub fn random_formula(len: usize, rng: &mut ChaCha20Rng) -> Vec<usize> {
    (0..len)
        .map(|i| if i % 2 == 0 { rng.random_range(0..10) } else { rng.random_range(10..14) })
        .collect()
}

/// Largest relative deviation of `a` from `b`, relative to the larger of
/// `|b|_∞` and `floor`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = b.iter().fold(floor, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Random strictly positive distribution shaped like `m`; lists get their
/// maximum length.
pub fn random_dist_for(m: &StructuralMapping, rng: &mut ChaCha20Rng) -> DistValue {
    let len = match m {
        StructuralMapping::List { max_len, .. } => *max_len,
        _ => 1,
    };
    let mut d = DistValue::uniform(m, len).expect("finite mapping");
    for row in d.rows_mut() {
        *row = random_row(row.len(), rng);
    }
    d
}
