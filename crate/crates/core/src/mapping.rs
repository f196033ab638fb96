//! Structural mappings: the type system describing program inputs and outputs.
//!
//! A [`StructuralMapping`] has two readings. Its *set* reading is the set of
//! concrete values ([`SetValue`]) the program consumes or produces. Its
//! *tensor* reading ([`DistValue`]) attaches a categorical distribution to
//! every discrete position so a perception model can express uncertainty.
//!
//! Discrete tensors are indexed by alphabet position. Every module relies on
//! that ordering, and [`enumerate_set`] / [`rank`] use it as the canonical
//! order of the output space.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used whenever two `Float` values are compared.
pub const FLOAT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("mapping contains Float and has no finite enumeration")]
    InfiniteMapping,
    #[error("value does not conform to mapping {0}")]
    NonConforming(String),
    #[error("distribution shape does not match mapping: {0}")]
    ShapeMismatch(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
}

/// Algebraic description of a program input or output type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralMapping {
    Discrete { alphabet: Vec<String> },
    Float,
    Permutation { n: usize },
    Tuple { members: Vec<StructuralMapping> },
    List { max_len: usize, element: Box<StructuralMapping> },
}

impl StructuralMapping {
    pub fn discrete<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self, MappingError> {
        let m = StructuralMapping::Discrete {
            alphabet: labels.into_iter().map(Into::into).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    /// `Discrete({lo..=hi})` with decimal labels.
    pub fn integer(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty integer range {lo}..={hi}");
        StructuralMapping::Discrete {
            alphabet: (lo..=hi).map(|v| v.to_string()).collect(),
        }
    }

    pub fn digit() -> Self {
        Self::integer(0, 9)
    }

    pub fn boolean() -> Self {
        StructuralMapping::Discrete {
            alphabet: vec!["false".into(), "true".into()],
        }
    }

    pub fn permutation(n: usize) -> Self {
        assert!(n >= 1, "permutation size must be positive");
        StructuralMapping::Permutation { n }
    }

    pub fn tuple(members: Vec<StructuralMapping>) -> Self {
        assert!(!members.is_empty(), "tuple needs at least one member");
        StructuralMapping::Tuple { members }
    }

    pub fn list(max_len: usize, element: StructuralMapping) -> Self {
        assert!(max_len >= 1, "list max length must be positive");
        StructuralMapping::List {
            max_len,
            element: Box::new(element),
        }
    }

    /// Checks the structural invariants recursively.
    pub fn validate(&self) -> Result<(), MappingError> {
        match self {
            StructuralMapping::Discrete { alphabet } => {
                if alphabet.is_empty() {
                    return Err(MappingError::InvalidMapping("empty alphabet".into()));
                }
                for (i, a) in alphabet.iter().enumerate() {
                    if alphabet[..i].contains(a) {
                        return Err(MappingError::InvalidMapping(format!(
                            "duplicate symbol {a:?}"
                        )));
                    }
                }
                Ok(())
            }
            StructuralMapping::Float => Ok(()),
            StructuralMapping::Permutation { n } => {
                if *n == 0 {
                    Err(MappingError::InvalidMapping("permutation of size 0".into()))
                } else {
                    Ok(())
                }
            }
            StructuralMapping::Tuple { members } => {
                if members.is_empty() {
                    return Err(MappingError::InvalidMapping("empty tuple".into()));
                }
                members.iter().try_for_each(|m| m.validate())
            }
            StructuralMapping::List { max_len, element } => {
                if *max_len == 0 {
                    return Err(MappingError::InvalidMapping("list max length 0".into()));
                }
                element.validate()
            }
        }
    }

    pub fn contains_float(&self) -> bool {
        match self {
            StructuralMapping::Float => true,
            StructuralMapping::Discrete { .. } | StructuralMapping::Permutation { .. } => false,
            StructuralMapping::Tuple { members } => members.iter().any(|m| m.contains_float()),
            StructuralMapping::List { element, .. } => element.contains_float(),
        }
    }

    pub fn contains_permutation(&self) -> bool {
        match self {
            StructuralMapping::Permutation { .. } => true,
            StructuralMapping::Discrete { .. } | StructuralMapping::Float => false,
            StructuralMapping::Tuple { members } => members.iter().any(|m| m.contains_permutation()),
            StructuralMapping::List { element, .. } => element.contains_permutation(),
        }
    }

    pub fn alphabet(&self) -> Option<&[String]> {
        match self {
            StructuralMapping::Discrete { alphabet } => Some(alphabet),
            _ => None,
        }
    }

    /// Index of `label` in a Discrete alphabet.
    pub fn symbol(&self, label: &str) -> Option<usize> {
        self.alphabet()?.iter().position(|a| a == label)
    }
}

impl fmt::Display for StructuralMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralMapping::Discrete { alphabet } => {
                write!(f, "Discrete({})", alphabet.join(","))
            }
            StructuralMapping::Float => write!(f, "Float"),
            StructuralMapping::Permutation { n } => write!(f, "Permutation({n})"),
            StructuralMapping::Tuple { members } => {
                write!(f, "Tuple(")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
            StructuralMapping::List { max_len, element } => write!(f, "List({max_len}, {element})"),
        }
    }
}

/// A concrete structured value, an element of SET(τ).
///
/// Permutations hold the images of positions `1..=n`, one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetValue {
    Discrete(usize),
    Float(f64),
    Perm(Vec<usize>),
    Tuple(Vec<SetValue>),
    List(Vec<SetValue>),
}

impl SetValue {
    pub fn as_discrete(&self) -> Option<usize> {
        match self {
            SetValue::Discrete(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            SetValue::Float(x) => Some(*x),
            _ => None,
        }
    }

    /// Structural equality where floats compare within [`FLOAT_TOLERANCE`].
    pub fn approx_eq(&self, other: &SetValue) -> bool {
        match (self, other) {
            (SetValue::Float(a), SetValue::Float(b)) => floats_match(*a, *b),
            (SetValue::Tuple(a), SetValue::Tuple(b)) | (SetValue::List(a), SetValue::List(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
            }
            _ => self == other,
        }
    }
}

/// `|y − ŷ| ≤ 1e-6·max(1, |y|)`.
pub fn floats_match(y: f64, y_hat: f64) -> bool {
    (y - y_hat).abs() <= FLOAT_TOLERANCE * y.abs().max(1.0)
}

/// Probability-annotated structure, an element of DIST(τ).
///
/// The same shape is reused for gradients with respect to a distribution, in
/// which case entries are unconstrained reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistValue {
    Discrete(Vec<f64>),
    Perm(Vec<Vec<f64>>),
    Tuple(Vec<DistValue>),
    List(Vec<DistValue>),
}

impl DistValue {
    /// Categorical rows in canonical depth-first order.
    pub fn rows(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        self.collect_rows(&mut out);
        out
    }

    fn collect_rows<'a>(&'a self, out: &mut Vec<&'a [f64]>) {
        match self {
            DistValue::Discrete(v) => out.push(v),
            DistValue::Perm(rows) => out.extend(rows.iter().map(Vec::as_slice)),
            DistValue::Tuple(ms) | DistValue::List(ms) => {
                ms.iter().for_each(|m| m.collect_rows(out))
            }
        }
    }

    pub fn rows_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = Vec::new();
        self.collect_rows_mut(&mut out);
        out
    }

    fn collect_rows_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Vec<f64>>) {
        match self {
            DistValue::Discrete(v) => out.push(v),
            DistValue::Perm(rows) => out.extend(rows.iter_mut()),
            DistValue::Tuple(ms) | DistValue::List(ms) => {
                ms.iter_mut().for_each(|m| m.collect_rows_mut(out))
            }
        }
    }

    pub fn row_count(&self) -> usize {
        match self {
            DistValue::Discrete(_) => 1,
            DistValue::Perm(rows) => rows.len(),
            DistValue::Tuple(ms) | DistValue::List(ms) => ms.iter().map(DistValue::row_count).sum(),
        }
    }

    /// Same shape, every entry zero.
    pub fn zeros_like(&self) -> DistValue {
        match self {
            DistValue::Discrete(v) => DistValue::Discrete(vec![0.0; v.len()]),
            DistValue::Perm(rows) => {
                DistValue::Perm(rows.iter().map(|r| vec![0.0; r.len()]).collect())
            }
            DistValue::Tuple(ms) => DistValue::Tuple(ms.iter().map(DistValue::zeros_like).collect()),
            DistValue::List(ms) => DistValue::List(ms.iter().map(DistValue::zeros_like).collect()),
        }
    }

    /// Uniform distribution of the shape `m` describes. Lists get `len` positions.
    pub fn uniform(m: &StructuralMapping, len: usize) -> Result<DistValue, MappingError> {
        Ok(match m {
            StructuralMapping::Discrete { alphabet } => {
                let n = alphabet.len();
                DistValue::Discrete(vec![1.0 / n as f64; n])
            }
            StructuralMapping::Float => return Err(MappingError::InfiniteMapping),
            StructuralMapping::Permutation { n } => {
                DistValue::Perm(vec![vec![1.0 / *n as f64; *n]; *n])
            }
            StructuralMapping::Tuple { members } => DistValue::Tuple(
                members
                    .iter()
                    .map(|mm| DistValue::uniform(mm, len))
                    .collect::<Result<_, _>>()?,
            ),
            StructuralMapping::List { element, .. } => DistValue::List(
                (0..len)
                    .map(|_| DistValue::uniform(element, len))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    /// Checks that the tensor has the shape required by `m`.
    pub fn check_shape(&self, m: &StructuralMapping) -> Result<(), MappingError> {
        let mismatch = || MappingError::ShapeMismatch(format!("{m}"));
        match (m, self) {
            (StructuralMapping::Discrete { alphabet }, DistValue::Discrete(v)) => {
                if v.len() == alphabet.len() {
                    Ok(())
                } else {
                    Err(mismatch())
                }
            }
            (StructuralMapping::Permutation { n }, DistValue::Perm(rows)) => {
                if rows.len() == *n && rows.iter().all(|r| r.len() == *n) {
                    Ok(())
                } else {
                    Err(mismatch())
                }
            }
            (StructuralMapping::Tuple { members }, DistValue::Tuple(ds)) => {
                if members.len() != ds.len() {
                    return Err(mismatch());
                }
                members.iter().zip(ds).try_for_each(|(mm, d)| d.check_shape(mm))
            }
            (StructuralMapping::List { max_len, element }, DistValue::List(ds)) => {
                if ds.is_empty() || ds.len() > *max_len {
                    return Err(mismatch());
                }
                ds.iter().try_for_each(|d| d.check_shape(element))
            }
            _ => Err(mismatch()),
        }
    }

    /// Element-wise in-place addition of a same-shaped value.
    pub fn add_assign(&mut self, other: &DistValue) {
        for (a, b) in self.rows_mut().into_iter().zip(other.rows()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for row in self.rows_mut() {
            row.iter_mut().for_each(|x| *x *= factor);
        }
    }
}

/// The (⊗, ⊕) pair used to combine proof probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semiring {
    /// ⊗ = min, ⊕ = max.
    MinMax,
    /// ⊗ = mult, ⊕ = add.
    AddMult,
}

impl Semiring {
    /// ⊗
    pub fn times(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::MinMax => a.min(b),
            Semiring::AddMult => a * b,
        }
    }

    /// ⊕
    pub fn plus(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::MinMax => a.max(b),
            Semiring::AddMult => a + b,
        }
    }

    pub fn one(self) -> f64 {
        1.0
    }

    /// Identity of ⊕ over probabilities (max with 0 is the identity on [0, 1]).
    pub fn zero(self) -> f64 {
        0.0
    }
}

impl std::str::FromStr for Semiring {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "min-max" | "minmax" => Ok(Semiring::MinMax),
            "add-mult" | "addmult" => Ok(Semiring::AddMult),
            other => Err(format!("unknown semiring {other:?}")),
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semiring::MinMax => "min-max",
            Semiring::AddMult => "add-mult",
        })
    }
}

pub fn conforms(m: &StructuralMapping, v: &SetValue) -> bool {
    match (m, v) {
        (StructuralMapping::Discrete { alphabet }, SetValue::Discrete(i)) => *i < alphabet.len(),
        (StructuralMapping::Float, SetValue::Float(x)) => x.is_finite(),
        (StructuralMapping::Permutation { n }, SetValue::Perm(p)) => is_permutation(p, *n),
        (StructuralMapping::Tuple { members }, SetValue::Tuple(vs)) => {
            members.len() == vs.len() && members.iter().zip(vs).all(|(mm, vv)| conforms(mm, vv))
        }
        (StructuralMapping::List { max_len, element }, SetValue::List(vs)) => {
            vs.len() <= *max_len && vs.iter().all(|vv| conforms(element, vv))
        }
        _ => false,
    }
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in p {
        if v == 0 || v > n || seen[v - 1] {
            return false;
        }
        seen[v - 1] = true;
    }
    true
}

/// |SET(τ)|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    /// Saturates at `u128::MAX`.
    Finite(u128),
    Infinite,
}

impl Cardinality {
    pub fn finite(self) -> Option<u128> {
        match self {
            Cardinality::Finite(n) => Some(n),
            Cardinality::Infinite => None,
        }
    }
}

pub fn cardinality(m: &StructuralMapping) -> Cardinality {
    match m {
        StructuralMapping::Discrete { alphabet } => Cardinality::Finite(alphabet.len() as u128),
        StructuralMapping::Float => Cardinality::Infinite,
        StructuralMapping::Permutation { n } => {
            Cardinality::Finite((1..=*n as u128).fold(1u128, |acc, k| acc.saturating_mul(k)))
        }
        StructuralMapping::Tuple { members } => {
            let mut total = 1u128;
            for mm in members {
                match cardinality(mm) {
                    Cardinality::Finite(c) => total = total.saturating_mul(c),
                    Cardinality::Infinite => return Cardinality::Infinite,
                }
            }
            Cardinality::Finite(total)
        }
        StructuralMapping::List { max_len, element } => match cardinality(element) {
            Cardinality::Infinite => Cardinality::Infinite,
            Cardinality::Finite(c) => {
                let mut total = 0u128;
                let mut power = 1u128;
                for _ in 0..*max_len {
                    power = power.saturating_mul(c);
                    total = total.saturating_add(power);
                }
                Cardinality::Finite(total)
            }
        },
    }
}

/// Every element of SET(m) in canonical order.
///
/// Tuples and fixed-length lists enumerate in product order with the last
/// component varying fastest; lists enumerate lengths `1..=max_len` in turn;
/// permutations enumerate in lexicographic order.
pub fn enumerate_set(m: &StructuralMapping) -> Result<Vec<SetValue>, MappingError> {
    if m.contains_float() {
        return Err(MappingError::InfiniteMapping);
    }
    Ok(enumerate_inner(m))
}

fn enumerate_inner(m: &StructuralMapping) -> Vec<SetValue> {
    match m {
        StructuralMapping::Discrete { alphabet } => {
            (0..alphabet.len()).map(SetValue::Discrete).collect()
        }
        StructuralMapping::Float => unreachable!("checked by enumerate_set"),
        StructuralMapping::Permutation { n } => permutations(*n)
            .into_iter()
            .map(SetValue::Perm)
            .collect(),
        StructuralMapping::Tuple { members } => {
            let parts: Vec<Vec<SetValue>> = members.iter().map(enumerate_inner).collect();
            product(&parts).into_iter().map(SetValue::Tuple).collect()
        }
        StructuralMapping::List { max_len, element } => {
            let elems = enumerate_inner(element);
            let mut out = Vec::new();
            for len in 1..=*max_len {
                let parts = vec![elems.clone(); len];
                out.extend(product(&parts).into_iter().map(SetValue::List));
            }
            out
        }
    }
}

fn product(parts: &[Vec<SetValue>]) -> Vec<Vec<SetValue>> {
    let mut acc: Vec<Vec<SetValue>> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for prefix in &acc {
            for v in part {
                let mut t = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        acc = next;
    }
    acc
}

/// Lexicographic permutations of `1..=n`.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = vec![cur.clone()];
    // next_permutation
    loop {
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("pivot exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// Position of `v` in `enumerate_set(m)`, without materializing the enumeration.
///
/// Returns `None` if `v` does not conform, `m` contains Float, or the index
/// does not fit in `usize`.
pub fn rank(m: &StructuralMapping, v: &SetValue) -> Option<usize> {
    if m.contains_float() || !conforms(m, v) {
        return None;
    }
    rank_inner(m, v).and_then(|r| usize::try_from(r).ok())
}

fn rank_inner(m: &StructuralMapping, v: &SetValue) -> Option<u128> {
    match (m, v) {
        (StructuralMapping::Discrete { .. }, SetValue::Discrete(i)) => Some(*i as u128),
        (StructuralMapping::Permutation { n }, SetValue::Perm(p)) => {
            // Lehmer code
            let mut r = 0u128;
            for i in 0..*n {
                let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count() as u128;
                let fact = (1..=(*n - 1 - i) as u128).product::<u128>();
                r = r.checked_add(smaller.checked_mul(fact)?)?;
            }
            Some(r)
        }
        (StructuralMapping::Tuple { members }, SetValue::Tuple(vs)) => {
            let mut r = 0u128;
            for (mm, vv) in members.iter().zip(vs) {
                let c = cardinality(mm).finite()?;
                r = r.checked_mul(c)?.checked_add(rank_inner(mm, vv)?)?;
            }
            Some(r)
        }
        (StructuralMapping::List { element, .. }, SetValue::List(vs)) => {
            if vs.is_empty() {
                return None;
            }
            let c = cardinality(element).finite()?;
            let mut offset = 0u128;
            let mut power = 1u128;
            for _ in 1..vs.len() {
                power = power.checked_mul(c)?;
                offset = offset.checked_add(power)?;
            }
            let mut r = 0u128;
            for vv in vs {
                r = r.checked_mul(c)?.checked_add(rank_inner(element, vv)?)?;
            }
            offset.checked_add(r)
        }
        _ => None,
    }
}

/// Output of the vectorizer δ: the ground-truth weight structure.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetWeights {
    Vector(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Members(Vec<TargetWeights>),
}

impl TargetWeights {
    pub fn flatten(&self) -> Vec<f64> {
        match self {
            TargetWeights::Vector(v) => v.clone(),
            TargetWeights::Rows(rows) => rows.concat(),
            TargetWeights::Members(ms) => ms.iter().flat_map(TargetWeights::flatten).collect(),
        }
    }
}

fn one_hot(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

/// δ_τ(y, ŷ).
///
/// `Float` yields one indicator slot per element of `y_hat` (duplicates kept).
/// Non-Float entries of `y_hat` never match.
pub fn vectorize(
    m: &StructuralMapping,
    y: &SetValue,
    y_hat: &[SetValue],
) -> Result<TargetWeights, MappingError> {
    if !conforms(m, y) {
        return Err(MappingError::NonConforming(format!("{m}")));
    }
    Ok(vectorize_inner(m, y, y_hat))
}

fn vectorize_inner(m: &StructuralMapping, y: &SetValue, y_hat: &[SetValue]) -> TargetWeights {
    match (m, y) {
        (StructuralMapping::Discrete { alphabet }, SetValue::Discrete(i)) => {
            TargetWeights::Vector(one_hot(alphabet.len(), *i))
        }
        (StructuralMapping::Float, SetValue::Float(target)) => TargetWeights::Vector(
            y_hat
                .iter()
                .map(|s| match s {
                    SetValue::Float(v) if floats_match(*target, *v) => 1.0,
                    _ => 0.0,
                })
                .collect(),
        ),
        (StructuralMapping::Permutation { n }, SetValue::Perm(p)) => {
            TargetWeights::Rows(p.iter().map(|&v| one_hot(*n, v - 1)).collect())
        }
        (StructuralMapping::Tuple { members }, SetValue::Tuple(vs)) => TargetWeights::Members(
            members
                .iter()
                .zip(vs)
                .map(|(mm, vv)| vectorize_inner(mm, vv, y_hat))
                .collect(),
        ),
        (StructuralMapping::List { element, .. }, SetValue::List(vs)) => TargetWeights::Members(
            vs.iter().map(|vv| vectorize_inner(element, vv, y_hat)).collect(),
        ),
        _ => unreachable!("conformance checked"),
    }
}

/// Positions `(row, column)` into `p_hat.rows()` selected by `r_hat`.
///
/// Every row of the flattened distribution is selected at most once. For
/// lists only the first `len(r_hat)` positions are used.
pub fn gather_positions(
    m: &StructuralMapping,
    r_hat: &SetValue,
    p_hat: &DistValue,
) -> Result<Vec<(usize, usize)>, MappingError> {
    let mut out = Vec::new();
    let mut row = 0;
    gather_inner(m, r_hat, p_hat, &mut row, &mut out)?;
    Ok(out)
}

fn gather_inner(
    m: &StructuralMapping,
    r: &SetValue,
    p: &DistValue,
    row: &mut usize,
    out: &mut Vec<(usize, usize)>,
) -> Result<(), MappingError> {
    let mismatch = || MappingError::ShapeMismatch(format!("{m}"));
    match (m, r, p) {
        (StructuralMapping::Discrete { alphabet }, SetValue::Discrete(i), DistValue::Discrete(v)) => {
            if v.len() != alphabet.len() || *i >= v.len() {
                return Err(mismatch());
            }
            out.push((*row, *i));
            *row += 1;
        }
        (StructuralMapping::Permutation { n }, SetValue::Perm(perm), DistValue::Perm(rows)) => {
            if rows.len() != *n || !is_permutation(perm, *n) {
                return Err(mismatch());
            }
            for (k, &v) in perm.iter().enumerate() {
                if rows[k].len() != *n {
                    return Err(mismatch());
                }
                out.push((*row + k, v - 1));
            }
            *row += n;
        }
        (StructuralMapping::Tuple { members }, SetValue::Tuple(vs), DistValue::Tuple(ds)) => {
            if members.len() != vs.len() || members.len() != ds.len() {
                return Err(mismatch());
            }
            for ((mm, vv), dd) in members.iter().zip(vs).zip(ds) {
                gather_inner(mm, vv, dd, row, out)?;
            }
        }
        (StructuralMapping::List { max_len, element }, SetValue::List(vs), DistValue::List(ds)) => {
            if vs.len() > *max_len || vs.len() > ds.len() {
                return Err(mismatch());
            }
            for (vv, dd) in vs.iter().zip(ds) {
                gather_inner(element, vv, dd, row, out)?;
            }
            *row += ds[vs.len()..].iter().map(DistValue::row_count).sum::<usize>();
        }
        _ => return Err(mismatch()),
    }
    Ok(())
}

/// σ_τ(r̂, p̂): ⊗ over the probabilities r̂ selects from p̂.
pub fn aggregate(
    m: &StructuralMapping,
    r_hat: &SetValue,
    p_hat: &DistValue,
    s: Semiring,
) -> Result<f64, MappingError> {
    let positions = gather_positions(m, r_hat, p_hat)?;
    let rows = p_hat.rows();
    Ok(positions
        .iter()
        .map(|&(row, col)| rows[row][col])
        .fold(s.one(), |acc, x| s.times(acc, x)))
}
