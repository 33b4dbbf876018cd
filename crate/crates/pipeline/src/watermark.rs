//! Coordinator watermark: the highest chunk key already enqueued.
//!
//! Persisted with temp-file + rename and guarded against regression, so a
//! crashed coordinator can only re-enqueue work (harmless downstream), never
//! lose it.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunk::ChunkKey;

#[derive(Debug, Error)]
pub enum WatermarkError {
    #[error("watermark I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("watermark file {path} is malformed: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("watermark regression: {current} -> {attempted}")]
    Regression { current: String, attempted: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Watermark {
    pub last_key: Option<ChunkKey>,
    pub persisted_at: DateTime<Utc>,
}

impl Watermark {
    pub fn empty() -> Self {
        Self {
            last_key: None,
            persisted_at: Utc::now(),
        }
    }

    /// Loads the watermark; a missing file is the empty watermark.
    pub fn load(path: &Path) -> Result<Self, WatermarkError> {
        match std::fs::read_to_string(path) {
            Ok(data) => serde_json::from_str(&data).map_err(|e| WatermarkError::Malformed {
                path: path.to_path_buf(),
                message: e.to_string(),
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::empty()),
            Err(source) => Err(WatermarkError::Io {
                path: path.to_path_buf(),
                source,
            }),
        }
    }

    /// Persists atomically, refusing to move backwards.
    pub fn store(path: &Path, new_key: &ChunkKey) -> Result<Watermark, WatermarkError> {
        let current = Self::load(path)?;
        if let Some(existing) = &current.last_key {
            if existing > new_key {
                return Err(WatermarkError::Regression {
                    current: existing.to_string(),
                    attempted: new_key.to_string(),
                });
            }
        }
        let updated = Watermark {
            last_key: Some(new_key.clone()),
            persisted_at: Utc::now(),
        };
        let tmp = path.with_extension("tmp");
        let io_err = |source| WatermarkError::Io {
            path: path.to_path_buf(),
            source,
        };
        std::fs::write(&tmp, serde_json::to_string(&updated).expect("serializes"))
            .map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)?;
        Ok(updated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_is_empty_watermark() {
        let dir = tempfile::tempdir().unwrap();
        let wm = Watermark::load(&dir.path().join("wm.json")).unwrap();
        assert!(wm.last_key.is_none());
    }

    #[test]
    fn store_load_roundtrip_and_monotonicity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wm.json");
        let k1 = ChunkKey::new("chunk-001").unwrap();
        let k2 = ChunkKey::new("chunk-002").unwrap();
        Watermark::store(&path, &k1).unwrap();
        assert_eq!(Watermark::load(&path).unwrap().last_key, Some(k1.clone()));
        Watermark::store(&path, &k2).unwrap();
        // Same key again is fine; going backwards is not.
        Watermark::store(&path, &k2).unwrap();
        assert!(matches!(
            Watermark::store(&path, &k1),
            Err(WatermarkError::Regression { .. })
        ));
        assert_eq!(Watermark::load(&path).unwrap().last_key, Some(k2));
    }
}
