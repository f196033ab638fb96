//! Categorical sampling of structured values from their distributions.
//!
//! Randomness is a pure function of a [`RandomnessKey`]. The key's four
//! 64-bit words, little-endian and concatenated in the order
//! `(root_seed, example_index, sample_index, dim_index)`, form the 256-bit
//! key of a ChaCha20 stream (nonce/stream 0, counter starting at 0). A uniform
//! number is `(next_u64 >> 11) · 2⁻⁵³`, where `next_u64` takes two successive
//! 32-bit output words, low word first. Any ChaCha20 implementation can
//! replay draws from this description.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{DistValue, SetValue, StructuralMapping};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    #[error("distribution shape does not match {0}")]
    ShapeMismatch(String),
    #[error("sample count must be positive")]
    ZeroSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RandomnessKey {
    pub root_seed: u64,
    pub example_index: u64,
    pub sample_index: u64,
    pub dim_index: u64,
}

impl RandomnessKey {
    pub fn new(root_seed: u64, example_index: u64, sample_index: u64, dim_index: u64) -> Self {
        RandomnessKey {
            root_seed,
            example_index,
            sample_index,
            dim_index,
        }
    }

    /// Root key for one example; sample and dim indices are filled in per draw.
    pub fn example(root_seed: u64, example_index: u64) -> Self {
        Self::new(root_seed, example_index, 0, 0)
    }

    pub fn with_draw(self, sample_index: u64, dim_index: u64) -> Self {
        RandomnessKey {
            sample_index,
            dim_index,
            ..self
        }
    }

    pub fn stream(&self) -> UniformStream {
        let mut seed = [0u8; 32];
        for (chunk, word) in seed.chunks_exact_mut(8).zip([
            self.root_seed,
            self.example_index,
            self.sample_index,
            self.dim_index,
        ]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        UniformStream {
            rng: ChaCha20Rng::from_seed(seed),
        }
    }
}

/// Uniform `[0, 1)` numbers from a keyed ChaCha20 stream.
pub struct UniformStream {
    rng: ChaCha20Rng,
}

impl UniformStream {
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Index drawn proportionally to the non-negative weights in `row`,
    /// restricted to positions where `allowed` holds.
    pub fn categorical_masked(
        &mut self,
        row: &[f64],
        allowed: impl Fn(usize) -> bool,
    ) -> Result<usize, SampleError> {
        let weight = |i: usize| if allowed(i) { row[i] } else { 0.0 };
        let mut total = 0.0;
        for i in 0..row.len() {
            let w = weight(i);
            if !(w >= 0.0) || !w.is_finite() {
                return Err(SampleError::DegenerateDistribution(format!(
                    "entry {i} is {w}"
                )));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(SampleError::DegenerateDistribution(
                "no positive mass after masking".into(),
            ));
        }
        let target = self.next_f64() * total;
        let mut cum = 0.0;
        let mut last_positive = 0;
        for i in 0..row.len() {
            let w = weight(i);
            if w > 0.0 {
                last_positive = i;
                cum += w;
                if cum > target {
                    return Ok(i);
                }
            }
        }
        // rounding left `target` at the very top of the mass
        Ok(last_positive)
    }

    pub fn categorical(&mut self, row: &[f64]) -> Result<usize, SampleError> {
        self.categorical_masked(row, |_| true)
    }
}

/// Draws one value of mapping `m` from `p_hat`.
///
/// Lists take the length of `p_hat`. Permutation rows are drawn in order,
/// each masked to the values not yet used and renormalized; the last row is
/// forced to the one remaining value and consumes no draw.
pub fn sample(
    m: &StructuralMapping,
    p_hat: &DistValue,
    key: RandomnessKey,
) -> Result<SetValue, SampleError> {
    let mut stream = key.stream();
    sample_from(m, p_hat, &mut stream)
}

fn sample_from(
    m: &StructuralMapping,
    p: &DistValue,
    stream: &mut UniformStream,
) -> Result<SetValue, SampleError> {
    let mismatch = || SampleError::ShapeMismatch(format!("{m}"));
    match (m, p) {
        (StructuralMapping::Discrete { alphabet }, DistValue::Discrete(v)) => {
            if v.len() != alphabet.len() {
                return Err(mismatch());
            }
            stream.categorical(v).map(SetValue::Discrete)
        }
        (StructuralMapping::Permutation { n }, DistValue::Perm(rows)) => {
            if rows.len() != *n || rows.iter().any(|r| r.len() != *n) {
                return Err(mismatch());
            }
            let mut used = vec![false; *n];
            let mut perm = Vec::with_capacity(*n);
            for (r, row) in rows.iter().enumerate() {
                let c = if r + 1 == *n {
                    // a single unused value remains
                    used.iter().position(|u| !u).expect("one value left")
                } else {
                    stream.categorical_masked(row, |i| !used[i])?
                };
                used[c] = true;
                perm.push(c + 1);
            }
            Ok(SetValue::Perm(perm))
        }
        (StructuralMapping::Tuple { members }, DistValue::Tuple(ds)) => {
            if members.len() != ds.len() {
                return Err(mismatch());
            }
            members
                .iter()
                .zip(ds)
                .map(|(mm, d)| sample_from(mm, d, stream))
                .collect::<Result<_, _>>()
                .map(SetValue::Tuple)
        }
        (StructuralMapping::List { max_len, element }, DistValue::List(ds)) => {
            if ds.len() > *max_len {
                return Err(mismatch());
            }
            ds.iter()
                .map(|d| sample_from(element, d, stream))
                .collect::<Result<_, _>>()
                .map(SetValue::List)
        }
        _ => Err(mismatch()),
    }
}

/// `k` joint draws; draw `j` of input `i` uses key
/// `(root.root_seed, root.example_index, j, i)`. Duplicates are kept.
pub fn sample_batch(
    ms: &[StructuralMapping],
    p_hats: &[DistValue],
    k: usize,
    root: RandomnessKey,
) -> Result<Vec<Vec<SetValue>>, SampleError> {
    if k == 0 {
        return Err(SampleError::ZeroSamples);
    }
    if ms.len() != p_hats.len() {
        return Err(SampleError::ShapeMismatch(format!(
            "{} mappings for {} distributions",
            ms.len(),
            p_hats.len()
        )));
    }
    (0..k)
        .map(|j| {
            ms.iter()
                .zip(p_hats)
                .enumerate()
                .map(|(i, (m, p))| sample(m, p, root.with_draw(j as u64, i as u64)))
                .collect()
        })
        .collect()
}
