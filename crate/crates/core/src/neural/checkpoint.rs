//! Binary checkpoint format, version 1. All integers and floats are
//! little-endian.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "ISEDCKPT"
//! 8       4     u32 format version (1)
//! 12      8     u64 root seed of the run
//! 20      4     u32 header length H
//! 24      H     UTF-8 JSON header: layer shapes, head mappings, optimizer
//!               hyperparameters and step count (or null)
//! 24+H    ...   f64 parameters in tensor order (per layer: weights row-major,
//!               then bias; hidden layers first, then heads), followed by the
//!               Adam first moments and then second moments in the same order
//!               when the header's "adam" entry is not null
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AdamState, Layer, Mlp};
use crate::mapping::StructuralMapping;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"ISEDCKPT";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    pub params: Mlp,
    pub adam: Option<AdamState>,
}

#[derive(Serialize, Deserialize)]
struct AdamHeader {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    hidden: Vec<(usize, usize)>,
    heads: Vec<(usize, usize)>,
    head_spec: Vec<StructuralMapping>,
    adam: Option<AdamHeader>,
}

fn put_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    let p = &ckpt.params;
    let header = Header {
        hidden: p.hidden.iter().map(|l| (l.inputs, l.outputs)).collect(),
        heads: p.heads.iter().map(|l| (l.inputs, l.outputs)).collect(),
        head_spec: p.head_spec.clone(),
        adam: ckpt.adam.as_ref().map(|a| AdamHeader {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            step: a.step,
        }),
    };
    let json = serde_json::to_vec(&header).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&ckpt.seed.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    p.tensors().iter().for_each(|t| put_f64s(&mut out, t));
    if let Some(a) = &ckpt.adam {
        a.m.iter().chain(&a.v).for_each(|t| put_f64s(&mut out, t));
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            CheckpointError::Corrupt(format!("truncated at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| CheckpointError::Corrupt("size".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut c = Cursor { bytes: &bytes, pos: 0 };
    if c.take(8).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = c.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    let seed = c.u64()?;
    let len = c.u32()? as usize;
    let header: Header =
        serde_json::from_slice(c.take(len)?).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    if header.heads.len() != header.head_spec.len() {
        return Err(CheckpointError::Corrupt("head count".into()));
    }
    let mut layer = |(i, o): (usize, usize)| -> Result<Layer, CheckpointError> {
        Ok(Layer {
            inputs: i,
            outputs: o,
            weights: c.f64s(i * o)?,
            bias: c.f64s(o)?,
        })
    };
    let hidden = header.hidden.iter().map(|&s| layer(s)).collect::<Result<Vec<_>, _>>()?;
    let heads = header.heads.iter().map(|&s| layer(s)).collect::<Result<Vec<_>, _>>()?;
    let params = Mlp {
        hidden,
        heads,
        head_spec: header.head_spec,
    };
    let adam = match header.adam {
        None => None,
        Some(h) => {
            let sizes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
            let m = sizes.iter().map(|&n| c.f64s(n)).collect::<Result<Vec<_>, _>>()?;
            let v = sizes.iter().map(|&n| c.f64s(n)).collect::<Result<Vec<_>, _>>()?;
            Some(AdamState {
                lr: h.lr,
                beta1: h.beta1,
                beta2: h.beta2,
                eps: h.eps,
                step: h.step,
                m,
                v,
            })
        }
    };
    if c.pos != bytes.len() {
        return Err(CheckpointError::Corrupt(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(Checkpoint { seed, params, adam })
}
