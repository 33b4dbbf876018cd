//! The coordinator: polls the chunk store, enqueues work orders for chunks
//! past the watermark, then advances the watermark.
//!
//! The watermark is persisted AFTER the enqueues: a crash in between
//! re-enqueues the same chunks on restart, which idempotent processing
//! absorbs. Persisting first would risk losing chunks, which nothing could
//! absorb. A lock file keeps the coordinator single-instance.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::chunk::{ChunkError, ChunkStore};
use crate::lock::{LockError, LockFile};
use crate::queue::{QueueError, WorkQueue};
use crate::watermark::{Watermark, WatermarkError};

#[derive(Debug, Error)]
pub enum CoordinatorError {
    #[error(transparent)]
    Lock(#[from] LockError),
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Watermark(#[from] WatermarkError),
}

#[derive(Debug, PartialEq)]
pub struct TickOutcome {
    pub orders_enqueued: usize,
    pub watermark: Watermark,
}

pub struct Coordinator {
    store: ChunkStore,
    queue: Arc<WorkQueue>,
    watermark_path: PathBuf,
    _lock: LockFile,
}

impl Coordinator {
    /// Takes the single-instance lock and binds the coordinator to its store,
    /// queue and watermark file.
    pub fn new(
        store: ChunkStore,
        queue: Arc<WorkQueue>,
        watermark_path: &Path,
        lock_path: &Path,
    ) -> Result<Self, CoordinatorError> {
        let lock = LockFile::acquire(lock_path)?;
        Ok(Self {
            store,
            queue,
            watermark_path: watermark_path.to_path_buf(),
            _lock: lock,
        })
    }

    /// One poll cycle: list chunks past the watermark in key order, enqueue
    /// one order each, persist the watermark at the last enqueued key.
    ///
    /// A queue failure aborts the tick with the watermark untouched.
    pub fn tick(&self) -> Result<TickOutcome, CoordinatorError> {
        let watermark = Watermark::load(&self.watermark_path)?;
        let new_keys = self.store.list_new(watermark.last_key.as_ref())?;
        if new_keys.is_empty() {
            return Ok(TickOutcome {
                orders_enqueued: 0,
                watermark,
            });
        }
        for key in &new_keys {
            self.queue.enqueue(key)?;
        }
        let last = new_keys.last().expect("non-empty");
        let watermark = Watermark::store(&self.watermark_path, last)?;
        Ok(TickOutcome {
            orders_enqueued: new_keys.len(),
            watermark,
        })
    }

    /// Poll loop; checks `shutdown` between ticks.
    pub fn run(
        &self,
        poll_interval: std::time::Duration,
        shutdown: &AtomicBool,
    ) -> Result<(), CoordinatorError> {
        while !shutdown.load(Ordering::SeqCst) {
            self.tick()?;
            let mut slept = std::time::Duration::ZERO;
            let step = std::time::Duration::from_millis(50).min(poll_interval);
            while slept < poll_interval && !shutdown.load(Ordering::SeqCst) {
                std::thread::sleep(step);
                slept += step;
            }
        }
        Ok(())
    }
}
