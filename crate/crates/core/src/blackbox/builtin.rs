//! The catalog of built-in benchmark programs.

use std::sync::Arc;

use super::leaf::LeafTable;
use super::{hwf, Program, ProgramError, ProgramResult};
use crate::mapping::{SetValue, StructuralMapping};

#[derive(Debug, Clone)]
pub struct BuiltinOptions {
    /// List length for `count-3-or-4`.
    pub count_len: usize,
    pub leaf_table: Option<Arc<LeafTable>>,
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        BuiltinOptions {
            count_len: 5,
            leaf_table: None,
        }
    }
}

/// Names accepted by [`builtin`]. `sum<n>` and `sort<n>` accept any positive `n`.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "sum2",
        "sum3",
        "sum4",
        "mult2",
        "mod2",
        "add-mod-3",
        "add-sub",
        "less-than",
        "equal",
        "not-3-or-4",
        "count-3-or-4",
        "hwf",
        "leaf",
        "sort3",
    ]
}

pub fn builtin(name: &str) -> Result<Program, ProgramError> {
    builtin_with(name, &BuiltinOptions::default())
}

fn digits(inputs: &[SetValue]) -> Result<Vec<usize>, ProgramError> {
    inputs
        .iter()
        .map(|v| v.as_discrete().ok_or_else(|| ProgramError::invalid_input("expected a digit")))
        .collect()
}

fn list_digits(inputs: &[SetValue]) -> Result<Vec<usize>, ProgramError> {
    match inputs {
        [SetValue::List(items)] => digits(items),
        _ => Err(ProgramError::invalid_input("expected one list of digits")),
    }
}

fn boolean(b: bool) -> SetValue {
    SetValue::Discrete(b as usize)
}

fn binary<F>(name: &str, out: StructuralMapping, f: F) -> Program
where
    F: Fn(usize, usize) -> ProgramResult + Send + Sync + 'static,
{
    Program::new(
        name,
        vec![StructuralMapping::digit(), StructuralMapping::digit()],
        out,
        move |inputs: &[SetValue]| {
            let d = digits(inputs)?;
            f(d[0], d[1])
        },
    )
}

fn parse_suffix(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok().filter(|&n| n >= 1)
}

pub fn builtin_with(name: &str, opts: &BuiltinOptions) -> Result<Program, ProgramError> {
    let unknown = || ProgramError::invalid_input(format!("unknown builtin program {name:?}"));
    if let Some(n) = parse_suffix(name, "sum") {
        return Ok(Program::new(
            name,
            vec![StructuralMapping::digit(); n],
            StructuralMapping::integer(0, 9 * n as i64),
            |inputs: &[SetValue]| Ok(SetValue::Discrete(digits(inputs)?.iter().sum())),
        ));
    }
    if let Some(n) = parse_suffix(name, "sort") {
        return Ok(Program::new(
            name,
            vec![StructuralMapping::list(n, StructuralMapping::digit())],
            StructuralMapping::permutation(n),
            move |inputs: &[SetValue]| {
                let d = list_digits(inputs)?;
                if d.len() != n {
                    return Err(ProgramError::invalid_input(format!("sort{n} needs {n} digits")));
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&i| d[i]);
                Ok(SetValue::Perm(order.into_iter().map(|i| i + 1).collect()))
            },
        ));
    }
    Ok(match name {
        "mult2" => binary(name, StructuralMapping::integer(0, 81), |a, b| {
            Ok(SetValue::Discrete(a * b))
        }),
        "mod2" => binary(name, StructuralMapping::integer(0, 8), |a, b| {
            if b == 0 {
                Err(ProgramError::invalid_input("mod2 with zero divisor"))
            } else {
                Ok(SetValue::Discrete(a % b))
            }
        }),
        "add-mod-3" => binary(name, StructuralMapping::integer(0, 2), |a, b| {
            Ok(SetValue::Discrete((a + b) % 3))
        }),
        "less-than" => binary(name, StructuralMapping::boolean(), |a, b| Ok(boolean(a < b))),
        "equal" => binary(name, StructuralMapping::boolean(), |a, b| Ok(boolean(a == b))),
        "add-sub" => Program::new(
            name,
            vec![StructuralMapping::digit(); 3],
            StructuralMapping::integer(-9, 18),
            |inputs: &[SetValue]| {
                let d = digits(inputs)?;
                // index of a+b−c in the alphabet −9..=18
                Ok(SetValue::Discrete(d[0] + d[1] + 9 - d[2]))
            },
        ),
        "not-3-or-4" => Program::new(
            name,
            vec![StructuralMapping::digit()],
            StructuralMapping::boolean(),
            |inputs: &[SetValue]| {
                let d = digits(inputs)?;
                Ok(boolean(d[0] != 3 && d[0] != 4))
            },
        ),
        "count-3-or-4" => {
            let len = opts.count_len.max(1);
            Program::new(
                name,
                vec![StructuralMapping::list(len, StructuralMapping::digit())],
                StructuralMapping::integer(0, len as i64),
                |inputs: &[SetValue]| {
                    let d = list_digits(inputs)?;
                    Ok(SetValue::Discrete(d.iter().filter(|&&x| x == 3 || x == 4).count()))
                },
            )
        }
        "hwf" => Program::new(
            name,
            vec![hwf::input_mapping()],
            StructuralMapping::Float,
            hwf::evaluate,
        ),
        "leaf" => {
            let table = opts.leaf_table.clone().unwrap_or_else(|| Arc::new(LeafTable::default()));
            Program::new(
                name,
                vec![table.input_mapping()],
                table.output_mapping(),
                move |inputs: &[SetValue]| table.evaluate(inputs),
            )
        }
        _ => return Err(unknown()),
    })
}
