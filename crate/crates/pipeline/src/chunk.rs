//! Chunk keys and the file-backed chunk store.
//!
//! A chunk is a file of newline-delimited JSON news items, named by its key;
//! the key's zero-padded timestamp prefix makes lexicographic order equal
//! creation order per producer. Listing is a sorted directory scan, which is
//! all the coordinator needs to find "new" chunks past its watermark.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use newsflow_core::item::RawNewsItem;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on items per chunk.
pub const MAX_CHUNK_ITEMS: usize = 1000;

#[derive(Debug, Error)]
pub enum ChunkError {
    #[error("invalid chunk key {0:?}: keys are non-empty [A-Za-z0-9._-] names")]
    BadKey(String),
    #[error("chunk {key} not found in store")]
    NotFound { key: String },
    #[error("chunk store I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("chunk must hold 1..={max} items, got {got}")]
    BadSize { got: usize, max: usize },
}

/// Lexicographically sortable chunk identifier; doubles as the file name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChunkKey(String);

impl ChunkKey {
    pub fn new(key: impl Into<String>) -> Result<Self, ChunkError> {
        let key = key.into();
        let ok = !key.is_empty()
            && !key.starts_with('.')
            && key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
        if !ok {
            return Err(ChunkError::BadKey(key));
        }
        Ok(Self(key))
    }

    /// Key with zero-padded millisecond timestamp prefix and
    /// producer/sequence suffix.
    pub fn compose(created_at: DateTime<Utc>, producer: &str, sequence: u64) -> Self {
        let ts = created_at.timestamp_millis().max(0);
        Self(format!("{ts:015}-{producer}-{sequence:06}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ChunkKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A parsed chunk: the per-line parse outcome is preserved so malformed
/// records can be counted as rejected without failing the chunk.
#[derive(Debug)]
pub struct ChunkRead {
    pub key: ChunkKey,
    pub items: Vec<Result<RawNewsItem, String>>,
}

/// Directory of chunk files.
#[derive(Debug, Clone)]
pub struct ChunkStore {
    root: PathBuf,
}

impl ChunkStore {
    pub fn open(root: &Path) -> Result<Self, ChunkError> {
        std::fs::create_dir_all(root).map_err(|source| ChunkError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes a chunk atomically (temp file + rename), one JSON item per
    /// line, optionally gzipped with a `.gz` suffix.
    pub fn write_chunk(
        &self,
        key: &ChunkKey,
        items: &[RawNewsItem],
        gzip: bool,
    ) -> Result<(), ChunkError> {
        if items.is_empty() || items.len() > MAX_CHUNK_ITEMS {
            return Err(ChunkError::BadSize {
                got: items.len(),
                max: MAX_CHUNK_ITEMS,
            });
        }
        let mut body = Vec::new();
        for item in items {
            serde_json::to_writer(&mut body, item).expect("item serializes");
            body.push(b'\n');
        }
        let file_name = if gzip {
            format!("{key}.gz")
        } else {
            key.to_string()
        };
        let final_path = self.root.join(&file_name);
        let tmp_path = self.root.join(format!(".tmp-{file_name}"));
        let io_err = |source| ChunkError::Io {
            path: final_path.clone(),
            source,
        };
        {
            let mut file = std::fs::File::create(&tmp_path).map_err(io_err)?;
            if gzip {
                let mut encoder = GzEncoder::new(&mut file, flate2::Compression::default());
                encoder.write_all(&body).map_err(io_err)?;
                encoder.finish().map_err(io_err)?;
            } else {
                file.write_all(&body).map_err(io_err)?;
            }
            file.sync_all().map_err(io_err)?;
        }
        std::fs::rename(&tmp_path, &final_path).map_err(io_err)?;
        Ok(())
    }

    /// Reads and parses a chunk; each line's parse result is independent.
    /// Items that parse but fail record validation are rejected lines too.
    pub fn read_chunk(&self, key: &ChunkKey) -> Result<ChunkRead, ChunkError> {
        let plain = self.root.join(key.as_str());
        let gz = self.root.join(format!("{key}.gz"));
        let (path, gzipped) = if plain.exists() {
            (plain, false)
        } else if gz.exists() {
            (gz, true)
        } else {
            return Err(ChunkError::NotFound {
                key: key.to_string(),
            });
        };
        let file = std::fs::File::open(&path).map_err(|source| ChunkError::Io {
            path: path.clone(),
            source,
        })?;
        let reader: Box<dyn Read> = if gzipped {
            Box::new(GzDecoder::new(file))
        } else {
            Box::new(file)
        };
        let mut items = Vec::new();
        for line in BufReader::new(reader).lines() {
            let line = line.map_err(|source| ChunkError::Io {
                path: path.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<RawNewsItem>(&line)
                .map_err(|e| e.to_string())
                .and_then(|item| match item.validate() {
                    Ok(()) => Ok(item),
                    Err(e) => Err(e.to_string()),
                });
            items.push(parsed);
        }
        Ok(ChunkRead {
            key: key.clone(),
            items,
        })
    }

    /// All chunk keys in the store, ascending. The `.gz` suffix is not part
    /// of the key.
    pub fn list_keys(&self) -> Result<Vec<ChunkKey>, ChunkError> {
        let entries = std::fs::read_dir(&self.root).map_err(|source| ChunkError::Io {
            path: self.root.clone(),
            source,
        })?;
        let mut keys = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| ChunkError::Io {
                path: self.root.clone(),
                source,
            })?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') {
                continue;
            }
            let key_str = name.strip_suffix(".gz").unwrap_or(&name);
            if let Ok(key) = ChunkKey::new(key_str) {
                keys.push(key);
            }
        }
        keys.sort();
        Ok(keys)
    }

    /// Keys strictly greater than the watermark, ascending.
    pub fn list_new(&self, after: Option<&ChunkKey>) -> Result<Vec<ChunkKey>, ChunkError> {
        let keys = self.list_keys()?;
        Ok(match after {
            None => keys,
            Some(mark) => keys.into_iter().filter(|k| k > mark).collect(),
        })
    }
}
