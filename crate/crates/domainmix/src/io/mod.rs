//! Deterministic artifact handling: seeded RNG streams, image files, embedding
//! files, and run configuration.

pub mod config;
pub mod emb;
pub mod ppm;
pub mod rng;

pub use config::RunConfig;
pub use emb::{read_emb, write_emb, EmbFile};
pub use ppm::{load_image, save_image};
pub use rng::{rng_stream, RandomStream};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: byte {offset}: {reason}")]
    Malformed {
        path: String,
        offset: usize,
        reason: String,
    },
    #[error("{path}: line {line}: {reason}")]
    Config {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
}

impl IoError {
    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn malformed(path: &std::path::Path, offset: usize, reason: impl Into<String>) -> Self {
        IoError::Malformed {
            path: path.display().to_string(),
            offset,
            reason: reason.into(),
        }
    }
}

/// Element-wise difference `q_t - q_s` between two embedding vectors of equal
/// dimension.
pub fn semantic_shift(q_s: &[f64], q_t: &[f64]) -> Result<Vec<f64>, IoError> {
    if q_s.len() != q_t.len() {
        return Err(IoError::DimMismatch(q_s.len(), q_t.len()));
    }
    Ok(q_t.iter().zip(q_s).map(|(t, s)| t - s).collect())
}
