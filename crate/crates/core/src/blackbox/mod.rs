//! Black-box programs `P : (τ₁, …, τ_m) → τ_o`.
//!
//! A [`Program`] bundles its input and output mappings with an opaque
//! evaluator. Each program counts its evaluations so callers can audit how
//! many times an estimator queried it.

mod builtin;
pub mod external;
pub mod hwf;
pub mod leaf;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{conforms, SetValue, StructuralMapping};

pub use builtin::{builtin, builtin_names, builtin_with, BuiltinOptions};
pub use external::{external_program, ProcessSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProgramErrorKind {
    DivideByZero,
    InvalidInput,
    ExternalFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?}: {message}")]
pub struct ProgramError {
    pub kind: ProgramErrorKind,
    pub message: String,
}

impl ProgramError {
    pub fn new(kind: ProgramErrorKind, message: impl Into<String>) -> Self {
        ProgramError {
            kind,
            message: message.into(),
        }
    }

    pub fn divide_by_zero() -> Self {
        Self::new(ProgramErrorKind::DivideByZero, "division by zero")
    }

    pub fn invalid_input(message: impl Into<String>) -> Self {
        Self::new(ProgramErrorKind::InvalidInput, message)
    }

    pub fn external(message: impl Into<String>) -> Self {
        Self::new(ProgramErrorKind::ExternalFailure, message)
    }
}

pub type ProgramResult = Result<SetValue, ProgramError>;

/// The callable behind a [`Program`]. Must be deterministic for equal inputs.
pub trait Evaluator: Send + Sync {
    fn call(&self, inputs: &[SetValue]) -> ProgramResult;
}

impl<F> Evaluator for F
where
    F: Fn(&[SetValue]) -> ProgramResult + Send + Sync,
{
    fn call(&self, inputs: &[SetValue]) -> ProgramResult {
        self(inputs)
    }
}

/// A black-box program with typed inputs and output.
///
/// Clones share the evaluator and the call counter.
#[derive(Clone)]
pub struct Program {
    name: String,
    input_mappings: Vec<StructuralMapping>,
    output_mapping: StructuralMapping,
    evaluator: Arc<dyn Evaluator>,
    calls: Arc<AtomicU64>,
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Program")
            .field("name", &self.name)
            .field("input_mappings", &self.input_mappings)
            .field("output_mapping", &self.output_mapping)
            .field("calls", &self.call_count())
            .finish()
    }
}

impl Program {
    pub fn new(
        name: impl Into<String>,
        input_mappings: Vec<StructuralMapping>,
        output_mapping: StructuralMapping,
        evaluator: impl Evaluator + 'static,
    ) -> Self {
        Program {
            name: name.into(),
            input_mappings,
            output_mapping,
            evaluator: Arc::new(evaluator),
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_mappings(&self) -> &[StructuralMapping] {
        &self.input_mappings
    }

    pub fn output_mapping(&self) -> &StructuralMapping {
        &self.output_mapping
    }

    /// The tuple of input mappings viewed as one mapping.
    pub fn input_tuple_mapping(&self) -> StructuralMapping {
        StructuralMapping::tuple(self.input_mappings.clone())
    }

    /// Runs the program. Non-conforming inputs are reported as
    /// `InvalidInput` without reaching the evaluator.
    pub fn evaluate(&self, inputs: &[SetValue]) -> ProgramResult {
        if inputs.len() != self.input_mappings.len() {
            return Err(ProgramError::invalid_input(format!(
                "{} expects {} inputs, got {}",
                self.name,
                self.input_mappings.len(),
                inputs.len()
            )));
        }
        for (i, (m, v)) in self.input_mappings.iter().zip(inputs).enumerate() {
            if !conforms(m, v) {
                return Err(ProgramError::invalid_input(format!(
                    "input {i} does not conform to {m}"
                )));
            }
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let out = self.evaluator.call(inputs)?;
        if !conforms(&self.output_mapping, &out) {
            return Err(ProgramError::external(format!(
                "{} produced a value outside {}",
                self.name, self.output_mapping
            )));
        }
        Ok(out)
    }

    /// Number of evaluations that reached the evaluator.
    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_call_count(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

/// JSON wire encoding of a value: Discrete as its label, Float as a number,
/// Permutation as an integer array, Tuple and List as arrays.
pub fn encode_value(m: &StructuralMapping, v: &SetValue) -> Option<serde_json::Value> {
    use serde_json::Value;
    Some(match (m, v) {
        (StructuralMapping::Discrete { alphabet }, SetValue::Discrete(i)) => {
            Value::String(alphabet.get(*i)?.clone())
        }
        (StructuralMapping::Float, SetValue::Float(x)) => {
            Value::Number(serde_json::Number::from_f64(*x)?)
        }
        (StructuralMapping::Permutation { .. }, SetValue::Perm(p)) => {
            Value::Array(p.iter().map(|&x| Value::from(x as u64)).collect())
        }
        (StructuralMapping::Tuple { members }, SetValue::Tuple(vs)) if members.len() == vs.len() => {
            Value::Array(
                members
                    .iter()
                    .zip(vs)
                    .map(|(mm, vv)| encode_value(mm, vv))
                    .collect::<Option<_>>()?,
            )
        }
        (StructuralMapping::List { element, .. }, SetValue::List(vs)) => Value::Array(
            vs.iter()
                .map(|vv| encode_value(element, vv))
                .collect::<Option<_>>()?,
        ),
        _ => return None,
    })
}

/// Inverse of [`encode_value`]. Discrete symbols may also arrive as JSON
/// numbers or booleans, which are matched against the label text.
pub fn decode_value(m: &StructuralMapping, j: &serde_json::Value) -> Option<SetValue> {
    use serde_json::Value;
    let v = match (m, j) {
        (StructuralMapping::Discrete { alphabet }, Value::String(s)) => {
            SetValue::Discrete(alphabet.iter().position(|a| a == s)?)
        }
        (StructuralMapping::Discrete { alphabet }, Value::Number(_) | Value::Bool(_)) => {
            let text = j.to_string();
            SetValue::Discrete(alphabet.iter().position(|a| *a == text)?)
        }
        (StructuralMapping::Float, Value::Number(n)) => SetValue::Float(n.as_f64()?),
        (StructuralMapping::Permutation { .. }, Value::Array(xs)) => SetValue::Perm(
            xs.iter()
                .map(|x| x.as_u64().map(|u| u as usize))
                .collect::<Option<_>>()?,
        ),
        (StructuralMapping::Tuple { members }, Value::Array(xs)) if members.len() == xs.len() => {
            SetValue::Tuple(
                members
                    .iter()
                    .zip(xs)
                    .map(|(mm, x)| decode_value(mm, x))
                    .collect::<Option<_>>()?,
            )
        }
        (StructuralMapping::List { element, .. }, Value::Array(xs)) => SetValue::List(
            xs.iter()
                .map(|x| decode_value(element, x))
                .collect::<Option<_>>()?,
        ),
        _ => return None,
    };
    conforms(m, &v).then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_rejects_nonconforming_inputs() {
        let p = builtin("sum2").unwrap();
        let err = p
            .evaluate(&[SetValue::Discrete(1), SetValue::Discrete(11)])
            .unwrap_err();
        assert_eq!(err.kind, ProgramErrorKind::InvalidInput);
        let err = p.evaluate(&[SetValue::Discrete(1)]).unwrap_err();
        assert_eq!(err.kind, ProgramErrorKind::InvalidInput);
        assert_eq!(p.call_count(), 0);
    }

    #[test]
    fn call_counter_is_shared_by_clones() {
        let p = builtin("sum2").unwrap();
        let q = p.clone();
        q.evaluate(&[SetValue::Discrete(1), SetValue::Discrete(2)]).unwrap();
        p.evaluate(&[SetValue::Discrete(1), SetValue::Discrete(2)]).unwrap();
        assert_eq!(p.call_count(), 2);
        p.reset_call_count();
        assert_eq!(q.call_count(), 0);
    }

    #[test]
    fn wire_encoding_round_trips() {
        let m = StructuralMapping::tuple(vec![
            StructuralMapping::digit(),
            StructuralMapping::Float,
            StructuralMapping::permutation(3),
            StructuralMapping::list(3, StructuralMapping::boolean()),
        ]);
        let v = SetValue::Tuple(vec![
            SetValue::Discrete(4),
            SetValue::Float(-2.5),
            SetValue::Perm(vec![3, 1, 2]),
            SetValue::List(vec![SetValue::Discrete(1), SetValue::Discrete(0)]),
        ]);
        let j = encode_value(&m, &v).unwrap();
        assert_eq!(j.to_string(), r#"["4",-2.5,[3,1,2],["true","false"]]"#);
        assert_eq!(decode_value(&m, &j).unwrap(), v);
        // numeric and boolean symbol spellings are accepted
        assert_eq!(
            decode_value(&StructuralMapping::digit(), &serde_json::json!(3)),
            Some(SetValue::Discrete(3))
        );
        assert_eq!(
            decode_value(&StructuralMapping::boolean(), &serde_json::json!(true)),
            Some(SetValue::Discrete(1))
        );
        assert_eq!(
            decode_value(&StructuralMapping::permutation(2), &serde_json::json!([1, 1])),
            None
        );
    }
}
