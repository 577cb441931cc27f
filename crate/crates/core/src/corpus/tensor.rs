//! Portable tensor files: a JSON header beside a flat little-endian payload.
//!
//! `<stem>.json` holds `{"shape": [...], "dtype": "float32", "byte_order": "little", "data": "<stem>.bin"}`
//! and `<stem>.bin` holds the row-major values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub byte_order: String,
    pub data: String,
}

impl TensorHeader {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

pub fn header_path(stem: &Path) -> PathBuf {
    stem.with_extension("json")
}

pub fn data_path(stem: &Path) -> PathBuf {
    stem.with_extension("bin")
}

pub fn encode_f32(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_f32(bytes: &[u8]) -> Option<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return None;
    }
    Some(
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
    )
}

pub fn write_tensor(stem: &Path, shape: &[usize], values: &[f32]) -> Result<TensorHeader, CorpusError> {
    let expected: usize = shape.iter().product();
    if expected != values.len() {
        return Err(CorpusError::ShapeMismatch(format!(
            "shape {shape:?} needs {expected} values, got {}",
            values.len()
        )));
    }
    let data = data_path(stem);
    let header = TensorHeader {
        shape: shape.to_vec(),
        dtype: "float32".into(),
        byte_order: "little".into(),
        data: data
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    std::fs::write(&data, encode_f32(values))?;
    std::fs::write(
        header_path(stem),
        serde_json::to_string_pretty(&header).expect("header serializes"),
    )?;
    Ok(header)
}

pub fn read_tensor(stem: &Path) -> Result<(TensorHeader, Vec<f32>), CorpusError> {
    let text = std::fs::read_to_string(header_path(stem))?;
    let header: TensorHeader =
        serde_json::from_str(&text).map_err(|e| CorpusError::BadTensor(e.to_string()))?;
    if header.dtype != "float32" || header.byte_order != "little" {
        return Err(CorpusError::BadTensor(format!(
            "unsupported dtype/byte order {}/{}",
            header.dtype, header.byte_order
        )));
    }
    let dir = stem.parent().unwrap_or_else(|| Path::new("."));
    let bytes = std::fs::read(dir.join(&header.data))?;
    let values = decode_f32(&bytes).ok_or_else(|| CorpusError::BadTensor("payload is not whole float32 values".into()))?;
    if values.len() != header.element_count() {
        return Err(CorpusError::BadTensor(format!(
            "payload holds {} values, header shape {:?} needs {}",
            values.len(),
            header.shape,
            header.element_count()
        )));
    }
    Ok((header, values))
}
