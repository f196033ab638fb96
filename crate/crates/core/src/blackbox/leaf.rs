//! Table-driven leaf classifier over (margin, shape, texture) traits.
//!
//! Rules are checked in order; the first rule whose every stated trait
//! matches decides the species, otherwise the table's default applies.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::mapping::{SetValue, StructuralMapping};

use super::{ProgramError, ProgramResult};

const DEFAULT_TABLE: &str = include_str!("../../data/leaf_tree.json");

#[derive(Debug, Error)]
pub enum LeafTableError {
    #[error("reading leaf table: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing leaf table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("leaf table references unknown {field} {value:?}")]
    UnknownLabel { field: &'static str, value: String },
}

#[derive(Debug, Deserialize)]
struct RawRule {
    margin: Option<String>,
    shape: Option<String>,
    texture: Option<String>,
    species: String,
}

#[derive(Debug, Deserialize)]
struct RawTable {
    margin: Vec<String>,
    shape: Vec<String>,
    texture: Vec<String>,
    species: Vec<String>,
    rules: Vec<RawRule>,
    default: String,
}

#[derive(Debug, Clone, PartialEq)]
struct Rule {
    margin: Option<usize>,
    shape: Option<usize>,
    texture: Option<usize>,
    species: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafTable {
    margin: Vec<String>,
    shape: Vec<String>,
    texture: Vec<String>,
    species: Vec<String>,
    rules: Vec<Rule>,
    default: usize,
}

fn lookup(labels: &[String], field: &'static str, value: &str) -> Result<usize, LeafTableError> {
    labels
        .iter()
        .position(|l| l == value)
        .ok_or_else(|| LeafTableError::UnknownLabel {
            field,
            value: value.to_string(),
        })
}

impl LeafTable {
    pub fn from_json(text: &str) -> Result<Self, LeafTableError> {
        let raw: RawTable = serde_json::from_str(text)?;
        let opt = |labels: &[String], field, v: &Option<String>| {
            v.as_deref().map(|s| lookup(labels, field, s)).transpose()
        };
        let rules = raw
            .rules
            .iter()
            .map(|r| {
                Ok(Rule {
                    margin: opt(&raw.margin, "margin", &r.margin)?,
                    shape: opt(&raw.shape, "shape", &r.shape)?,
                    texture: opt(&raw.texture, "texture", &r.texture)?,
                    species: lookup(&raw.species, "species", &r.species)?,
                })
            })
            .collect::<Result<_, LeafTableError>>()?;
        let default = lookup(&raw.species, "species", &raw.default)?;
        let table = LeafTable {
            margin: raw.margin,
            shape: raw.shape,
            texture: raw.texture,
            species: raw.species,
            rules,
            default,
        };
        for m in table.mappings() {
            m.validate().map_err(|e| LeafTableError::UnknownLabel {
                field: "alphabet",
                value: e.to_string(),
            })?;
        }
        table
            .output_mapping()
            .validate()
            .map_err(|e| LeafTableError::UnknownLabel {
                field: "species",
                value: e.to_string(),
            })?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, LeafTableError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn mappings(&self) -> [StructuralMapping; 3] {
        let d = |v: &Vec<String>| StructuralMapping::Discrete { alphabet: v.clone() };
        [d(&self.margin), d(&self.shape), d(&self.texture)]
    }

    pub fn input_mapping(&self) -> StructuralMapping {
        StructuralMapping::tuple(self.mappings().to_vec())
    }

    pub fn output_mapping(&self) -> StructuralMapping {
        StructuralMapping::Discrete {
            alphabet: self.species.clone(),
        }
    }

    pub fn classify(&self, margin: usize, shape: usize, texture: usize) -> usize {
        let hit = |want: Option<usize>, got: usize| want.is_none_or(|w| w == got);
        self.rules
            .iter()
            .find(|r| hit(r.margin, margin) && hit(r.shape, shape) && hit(r.texture, texture))
            .map_or(self.default, |r| r.species)
    }

    pub(super) fn evaluate(&self, inputs: &[SetValue]) -> ProgramResult {
        let [SetValue::Tuple(traits)] = inputs else {
            return Err(ProgramError::invalid_input("leaf expects one trait tuple"));
        };
        match traits.as_slice() {
            [SetValue::Discrete(m), SetValue::Discrete(s), SetValue::Discrete(t)] => {
                Ok(SetValue::Discrete(self.classify(*m, *s, *t)))
            }
            _ => Err(ProgramError::invalid_input("malformed leaf traits")),
        }
    }
}

impl Default for LeafTable {
    fn default() -> Self {
        LeafTable::from_json(DEFAULT_TABLE).expect("bundled leaf table is valid")
    }
}
