//! The `EMB1` embedding file format.
//!
//! Layout: magic bytes `EMB1`, then three little-endian u32 values `n`
//! (row count), `d` (dimension), `K` (class count), then `n * d` little-endian
//! f32 feature values row by row, then `n` little-endian u32 labels. The byte
//! length must match the header exactly.

use std::path::Path;

use crate::io::IoError;

/// Raw contents of an `EMB1` file. Rows are not required to be unit-norm here;
/// that is the concern of consumers that need distribution inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbFile {
    pub dim: usize,
    pub n_classes: usize,
    /// `n * dim` row-major feature values.
    pub features: Vec<f64>,
    pub labels: Vec<u32>,
}

impl EmbFile {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn read_emb(path: impl AsRef<Path>) -> Result<EmbFile, IoError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| IoError::file(path, e))?;
    if bytes.len() < 16 {
        return Err(IoError::malformed(path, 0, "truncated header"));
    }
    if &bytes[..4] != b"EMB1" {
        return Err(IoError::malformed(path, 0, "bad magic, expected EMB1"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let n = word(4) as usize;
    let dim = word(8) as usize;
    let n_classes = word(12) as usize;
    if dim == 0 {
        return Err(IoError::malformed(path, 8, "dimension must be positive"));
    }
    let expected = 16 + 4 * n * dim + 4 * n;
    if bytes.len() != expected {
        return Err(IoError::malformed(
            path,
            16,
            format!("declared sizes need {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let mut features = Vec::with_capacity(n * dim);
    for i in 0..n * dim {
        let off = 16 + 4 * i;
        let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        if !v.is_finite() {
            return Err(IoError::malformed(path, off, "non-finite feature value"));
        }
        features.push(v as f64);
    }
    let labels_off = 16 + 4 * n * dim;
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let off = labels_off + 4 * i;
        let l = word(off);
        if l as usize >= n_classes {
            return Err(IoError::malformed(
                path,
                off,
                format!("label {l} out of range for {n_classes} classes"),
            ));
        }
        labels.push(l);
    }
    Ok(EmbFile {
        dim,
        n_classes,
        features,
        labels,
    })
}

pub fn write_emb(
    path: impl AsRef<Path>,
    dim: usize,
    n_classes: usize,
    features: &[f64],
    labels: &[u32],
) -> Result<(), IoError> {
    let path = path.as_ref();
    assert!(dim > 0, "dimension must be positive");
    assert_eq!(
        features.len(),
        labels.len() * dim,
        "feature count must equal rows * dim"
    );
    assert!(
        labels.iter().all(|&l| (l as usize) < n_classes),
        "labels must lie in [0, n_classes)"
    );
    let n = labels.len();
    let mut bytes = Vec::with_capacity(16 + 4 * n * dim + 4 * n);
    bytes.extend_from_slice(b"EMB1");
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    bytes.extend_from_slice(&(n_classes as u32).to_le_bytes());
    for &v in features {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    for &l in labels {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| IoError::file(path, e))
}
