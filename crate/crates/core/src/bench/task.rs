use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::BenchError;
use crate::blackbox::{builtin, hwf, Program};
use crate::mapping::{SetValue, StructuralMapping};

/// How one program input is presented to the perception model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputLayout {
    /// One feature vector for the whole input.
    Single,
    /// One feature vector per list element.
    List,
}

/// How hidden symbols are drawn before the validity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolPrior {
    /// Every slot uniform; lists at their maximum length.
    Uniform,
    /// Alternating digit/operator strings with length weights 1:1:2:6
    /// over lengths 1, 3, 5, 7.
    Formula,
}

/// A benchmark task: a program plus everything needed to build datasets and
/// a perception model for it.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub name: String,
    pub program: Program,
    /// Mapping of one perception slot, shared by every input (weight sharing).
    pub unit: StructuralMapping,
    pub layouts: Vec<InputLayout>,
    pub train_size: usize,
    pub test_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub prior: SymbolPrior,
}

pub const DEFAULT_TRAIN_SIZE: usize = 5000;
pub const DEFAULT_TEST_SIZE: usize = 500;
pub const DEFAULT_HIDDEN: [usize; 1] = [128];

fn is_unit(m: &StructuralMapping) -> bool {
    match m {
        StructuralMapping::Discrete { .. } => true,
        StructuralMapping::Tuple { members } => {
            members.iter().all(|x| matches!(x, StructuralMapping::Discrete { .. }))
        }
        _ => false,
    }
}

impl TaskSpec {
    /// Derives the slot layout from the program's input mappings. Every input
    /// must be a unit (a Discrete or a Tuple of Discretes) or a List of one,
    /// and all units must agree.
    pub fn from_program(program: Program) -> Result<Self, BenchError> {
        let mut unit: Option<StructuralMapping> = None;
        let mut layouts = Vec::new();
        for m in program.input_mappings() {
            let (u, layout) = match m {
                StructuralMapping::List { element, .. } if is_unit(element) => {
                    (element.as_ref(), InputLayout::List)
                }
                m if is_unit(m) => (m, InputLayout::Single),
                other => {
                    return Err(BenchError::UnsupportedTask(format!(
                        "input mapping {other} has no perception layout"
                    )))
                }
            };
            match &unit {
                Some(prev) if prev != u => {
                    return Err(BenchError::UnsupportedTask("inputs of different types".into()))
                }
                _ => unit = Some(u.clone()),
            }
            layouts.push(layout);
        }
        let unit = unit.ok_or_else(|| BenchError::UnsupportedTask("program has no inputs".into()))?;
        let prior = if program.name() == "hwf" {
            SymbolPrior::Formula
        } else {
            SymbolPrior::Uniform
        };
        Ok(TaskSpec {
            name: program.name().to_string(),
            program,
            unit,
            layouts,
            train_size: DEFAULT_TRAIN_SIZE,
            test_size: DEFAULT_TEST_SIZE,
            hidden_sizes: DEFAULT_HIDDEN.to_vec(),
            prior,
        })
    }

    pub fn builtin(name: &str) -> Result<Self, BenchError> {
        let program = builtin(name).map_err(|_| BenchError::UnknownTask(name.to_string()))?;
        Self::from_program(program)
    }

    /// The Discrete mappings realized by the model's softmax heads.
    pub fn head_spec(&self) -> Vec<StructuralMapping> {
        match &self.unit {
            StructuralMapping::Tuple { members } => members.clone(),
            m => vec![m.clone()],
        }
    }

    /// Length of a noiseless synthetic feature vector.
    pub fn feature_dim(&self) -> usize {
        self.head_spec().iter().map(|m| m.alphabet().map_or(0, <[String]>::len)).sum()
    }

    /// Concatenated one-hot encoding of one slot's symbol.
    pub fn one_hot(&self, symbol: &SetValue) -> Vec<f64> {
        let mut out = vec![0.0; self.feature_dim()];
        let parts: Vec<usize> = match symbol {
            SetValue::Tuple(vs) => vs.iter().filter_map(SetValue::as_discrete).collect(),
            v => v.as_discrete().into_iter().collect(),
        };
        let mut offset = 0;
        for (m, c) in self.head_spec().iter().zip(parts) {
            out[offset + c] = 1.0;
            offset += m.alphabet().map_or(0, <[String]>::len);
        }
        out
    }

    /// Slot symbols of one input value, in slot order.
    pub fn slots<'a>(&self, input: usize, value: &'a SetValue) -> Vec<&'a SetValue> {
        match (self.layouts[input], value) {
            (InputLayout::List, SetValue::List(items)) => items.iter().collect(),
            _ => vec![value],
        }
    }

    fn draw_unit(&self, rng: &mut ChaCha20Rng) -> SetValue {
        let pick = |m: &StructuralMapping, rng: &mut ChaCha20Rng| {
            SetValue::Discrete(rng.random_range(0..m.alphabet().map_or(1, <[String]>::len)))
        };
        match &self.unit {
            StructuralMapping::Tuple { members } => {
                SetValue::Tuple(members.iter().map(|m| pick(m, rng)).collect())
            }
            m => pick(m, rng),
        }
    }

    /// One candidate assignment of hidden symbols, before the validity check.
    pub(crate) fn draw_symbols(&self, rng: &mut ChaCha20Rng) -> Vec<SetValue> {
        if self.prior == SymbolPrior::Formula {
            let len = [1, 3, 5, 5, 7, 7, 7, 7, 7, 7][rng.random_range(0..10)];
            return vec![formula(len, rng)];
        }
        self.program
            .input_mappings()
            .iter()
            .zip(&self.layouts)
            .map(|(m, layout)| match (layout, m) {
                (InputLayout::List, StructuralMapping::List { max_len, .. }) => {
                    SetValue::List((0..*max_len).map(|_| self.draw_unit(rng)).collect())
                }
                _ => self.draw_unit(rng),
            })
            .collect()
    }
}

/// A random alternating digit/operator string of odd length `len`.
pub(crate) fn formula(len: usize, rng: &mut ChaCha20Rng) -> SetValue {
    SetValue::List(
        (0..len)
            .map(|i| {
                SetValue::Discrete(if i % 2 == 0 {
                    rng.random_range(0..10)
                } else {
                    rng.random_range(hwf::PLUS..=hwf::DIVIDE)
                })
            })
            .collect(),
    )
}
