//! Reader for the IDX files MNIST ships in: a big-endian magic number, one
//! big-endian u32 per dimension, then raw unsigned bytes.

use std::path::Path;

use super::BenchError;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Digit images flattened row-major and scaled to `[0, 1]`, with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDigits {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

fn format_error(offset: usize, message: impl Into<String>) -> BenchError {
    BenchError::Format {
        offset,
        message: message.into(),
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32, BenchError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| format_error(offset, "truncated header"))
}

/// Parses an image file and a label file held in memory.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<RawDigits, BenchError> {
    let magic = be_u32(images, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(format_error(0, format!("image magic {magic:#010x}")));
    }
    let count = be_u32(images, 4)? as usize;
    let rows = be_u32(images, 8)? as usize;
    let cols = be_u32(images, 12)? as usize;
    let size = rows * cols;
    let needed = 16 + count * size;
    if images.len() < needed {
        return Err(format_error(images.len(), format!("image data truncated, expected {needed} bytes")));
    }
    if images.len() > needed {
        return Err(format_error(needed, "trailing bytes after image data"));
    }
    let magic = be_u32(labels, 0)?;
    if magic != LABELS_MAGIC {
        return Err(format_error(0, format!("label magic {magic:#010x}")));
    }
    let n_labels = be_u32(labels, 4)? as usize;
    if n_labels != count {
        return Err(format_error(4, format!("{n_labels} labels for {count} images")));
    }
    if labels.len() != 8 + count {
        return Err(format_error(labels.len().min(8 + count), "label data length"));
    }
    let label_bytes = &labels[8..];
    if let Some(i) = label_bytes.iter().position(|&l| l > 9) {
        return Err(format_error(8 + i, format!("label {} is not a digit", label_bytes[i])));
    }
    let images = images[16..]
        .chunks_exact(size.max(1))
        .take(count)
        .map(|px| px.iter().map(|&b| b as f64 / 255.0).collect())
        .collect();
    Ok(RawDigits {
        rows,
        cols,
        images,
        labels: label_bytes.to_vec(),
    })
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawDigits, BenchError> {
    parse_idx(&std::fs::read(images_path)?, &std::fs::read(labels_path)?)
}

#[cfg(test)]
pub(crate) fn encode_idx(images: &[Vec<u8>], rows: usize, cols: usize, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::new();
    for v in [IMAGES_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    images.iter().for_each(|i| img.extend_from_slice(i));
    let mut lab = Vec::new();
    for v in [LABELS_MAGIC, labels.len() as u32] {
        lab.extend_from_slice(&v.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    (img, lab)
}
