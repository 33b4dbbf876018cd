//! Persistent first-writer register for dedup codes.
//!
//! Desk-scale stand-in for a strongly consistent key-value store: an in-memory
//! map guarded by a mutex, backed by a write-ahead log that is appended and
//! flushed before a put is acknowledged. An OS-level exclusive lock on the log
//! file keeps a second process from writing the same register.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use fs2::FileExt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegisterError {
    #[error("register I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("register {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("register log {path} corrupt at line {line}")]
    Corrupt { path: PathBuf, line: usize },
}

/// Linearizable put-if-absent map from dedup code to the first item id that
/// recorded it.
pub struct DedupRegister {
    path: PathBuf,
    inner: Mutex<Inner>,
}

struct Inner {
    map: HashMap<String, String>,
    wal: BufWriter<File>,
}

impl DedupRegister {
    /// Opens (or creates) the register at `path`, replaying the log.
    pub fn open(path: &Path) -> Result<Self, RegisterError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|source| RegisterError::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
        }
        let mut file = OpenOptions::new()
            .read(true)
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| RegisterError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        file.try_lock_exclusive()
            .map_err(|_| RegisterError::Locked(path.to_path_buf()))?;

        let mut map = HashMap::new();
        file.seek(SeekFrom::Start(0))
            .map_err(|source| RegisterError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        let reader = BufReader::new(&file);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| RegisterError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let Some((code, item_id)) = line.split_once('\t') else {
                // A torn trailing line from a crash mid-append is tolerated;
                // anything earlier is corruption.
                if lineno + 1 == count_lines(path)? {
                    break;
                }
                return Err(RegisterError::Corrupt {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                });
            };
            map.entry(code.to_string())
                .or_insert_with(|| item_id.to_string());
        }
        file.seek(SeekFrom::End(0))
            .map_err(|source| RegisterError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(Self {
            path: path.to_path_buf(),
            inner: Mutex::new(Inner {
                map,
                wal: BufWriter::new(file),
            }),
        })
    }

    /// Atomically records `item_id` as the first holder of `code`. Returns
    /// `None` when this call won the slot, or the already-recorded item id.
    /// The log append is flushed before the winner is acknowledged.
    pub fn put_if_absent(
        &self,
        code: &str,
        item_id: &str,
    ) -> Result<Option<String>, RegisterError> {
        let mut inner = self.inner.lock().expect("register mutex poisoned");
        if let Some(existing) = inner.map.get(code) {
            return Ok(Some(existing.clone()));
        }
        writeln!(inner.wal, "{code}\t{item_id}").map_err(|source| RegisterError::Io {
            path: self.path.clone(),
            source,
        })?;
        inner.wal.flush().map_err(|source| RegisterError::Io {
            path: self.path.clone(),
            source,
        })?;
        inner.map.insert(code.to_string(), item_id.to_string());
        Ok(None)
    }

    pub fn get(&self, code: &str) -> Option<String> {
        self.inner
            .lock()
            .expect("register mutex poisoned")
            .map
            .get(code)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.inner
            .lock()
            .expect("register mutex poisoned")
            .map
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn count_lines(path: &Path) -> Result<usize, RegisterError> {
    let file = File::open(path).map_err(|source| RegisterError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufReader::new(file).lines().count())
}
