//! Durable at-least-once work queue with visibility timeouts.
//!
//! Orders are journaled (append + flush) before they become visible, so an
//! enqueue that returned cannot be lost. A dequeued order is leased: invisible
//! until its deadline, then redelivered with an incremented attempt count.
//! Acks remove orders permanently and are idempotent. Leases live in memory
//! only: a process restart redelivers everything un-acked, which is exactly
//! the at-least-once contract the idempotent pipeline absorbs.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::chunk::ChunkKey;

/// Millisecond clock; swap in a [`SimClock`] to drive timeout tests
/// deterministically.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

/// Wall clock.
#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// Manually advanced clock for tests.
#[derive(Debug, Default)]
pub struct SimClock {
    now: AtomicU64,
}

impl SimClock {
    pub fn new(start_ms: u64) -> Self {
        Self {
            now: AtomicU64::new(start_ms),
        }
    }

    pub fn advance(&self, delta_ms: u64) {
        self.now.fetch_add(delta_ms, Ordering::SeqCst);
    }
}

impl Clock for SimClock {
    fn now_ms(&self) -> u64 {
        self.now.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Error)]
pub enum QueueError {
    #[error("queue journal I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("queue journal {path} corrupt at line {line}")]
    Corrupt { path: PathBuf, line: usize },
}

/// A delivery of one chunk's processing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkOrder {
    pub order_id: String,
    pub chunk_key: ChunkKey,
    /// 1 on first delivery, +1 per redelivery.
    pub attempt: u32,
    pub enqueued_at_ms: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub enum AckOutcome {
    Removed,
    /// Unknown or already-acked order id; a warning-level no-op.
    Unknown,
}

struct OrderRec {
    chunk_key: ChunkKey,
    enqueued_at_ms: u64,
    attempt: u32,
    /// Some(deadline) while leased.
    lease_deadline_ms: Option<u64>,
}

struct QueueState {
    ready: VecDeque<String>,
    orders: HashMap<String, OrderRec>,
    journal: BufWriter<File>,
    next_seq: u64,
}

/// The queue handle; safe to share across worker threads.
pub struct WorkQueue {
    state: Mutex<QueueState>,
    path: PathBuf,
    visibility_timeout_ms: u64,
    clock: Arc<dyn Clock>,
}

impl WorkQueue {
    /// Opens (or creates) a queue journal, replaying enqueues and acks.
    pub fn open(
        path: &Path,
        visibility_timeout_ms: u64,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, QueueError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|source| QueueError::Io {
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
            .map_err(|source| QueueError::Io {
                path: path.to_path_buf(),
                source,
            })?;

        let mut orders = HashMap::new();
        let mut ready = VecDeque::new();
        let mut next_seq = 0u64;
        file.seek(SeekFrom::Start(0))
            .map_err(|source| QueueError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        for (lineno, line) in BufReader::new(&file).lines().enumerate() {
            let line = line.map_err(|source| QueueError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let corrupt = || QueueError::Corrupt {
                path: path.to_path_buf(),
                line: lineno + 1,
            };
            let mut fields = line.split('\t');
            match fields.next() {
                Some("E") => {
                    let order_id = fields.next().ok_or_else(corrupt)?.to_string();
                    let chunk_key =
                        ChunkKey::new(fields.next().ok_or_else(corrupt)?).map_err(|_| corrupt())?;
                    let enqueued_at_ms: u64 = fields
                        .next()
                        .ok_or_else(corrupt)?
                        .parse()
                        .map_err(|_| corrupt())?;
                    if let Some(seq) = order_seq(&order_id) {
                        next_seq = next_seq.max(seq + 1);
                    }
                    ready.push_back(order_id.clone());
                    orders.insert(
                        order_id,
                        OrderRec {
                            chunk_key,
                            enqueued_at_ms,
                            attempt: 0,
                            lease_deadline_ms: None,
                        },
                    );
                }
                Some("A") => {
                    let order_id = fields.next().ok_or_else(corrupt)?;
                    orders.remove(order_id);
                    ready.retain(|id| id != order_id);
                }
                _ => return Err(corrupt()),
            }
        }
        file.seek(SeekFrom::End(0))
            .map_err(|source| QueueError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(Self {
            state: Mutex::new(QueueState {
                ready,
                orders,
                journal: BufWriter::new(file),
                next_seq,
            }),
            path: path.to_path_buf(),
            visibility_timeout_ms,
            clock,
        })
    }

    pub fn visibility_timeout_ms(&self) -> u64 {
        self.visibility_timeout_ms
    }

    /// Journals and enqueues one order for `chunk_key`. The journal write is
    /// flushed before the order becomes visible.
    pub fn enqueue(&self, chunk_key: &ChunkKey) -> Result<WorkOrder, QueueError> {
        let mut state = self.state.lock().expect("queue mutex");
        let seq = state.next_seq;
        state.next_seq += 1;
        let order_id = format!("{seq:010}@{chunk_key}");
        let enqueued_at_ms = self.clock.now_ms();
        writeln!(
            state.journal,
            "E\t{order_id}\t{chunk_key}\t{enqueued_at_ms}"
        )
        .map_err(|source| QueueError::Io {
            path: self.path.clone(),
            source,
        })?;
        state.journal.flush().map_err(|source| QueueError::Io {
            path: self.path.clone(),
            source,
        })?;
        state.ready.push_back(order_id.clone());
        state.orders.insert(
            order_id.clone(),
            OrderRec {
                chunk_key: chunk_key.clone(),
                enqueued_at_ms,
                attempt: 0,
                lease_deadline_ms: None,
            },
        );
        Ok(WorkOrder {
            order_id,
            chunk_key: chunk_key.clone(),
            attempt: 0,
            enqueued_at_ms,
        })
    }

    /// Next visible order, leased for the visibility timeout; `None` when
    /// nothing is deliverable right now.
    pub fn dequeue(&self) -> Result<Option<WorkOrder>, QueueError> {
        let now = self.clock.now_ms();
        let mut state = self.state.lock().expect("queue mutex");
        expire_leases(&mut state, now);
        let Some(order_id) = state.ready.pop_front() else {
            return Ok(None);
        };
        let rec = state
            .orders
            .get_mut(&order_id)
            .expect("ready ids always have records");
        rec.attempt += 1;
        rec.lease_deadline_ms = Some(now + self.visibility_timeout_ms);
        Ok(Some(WorkOrder {
            order_id: order_id.clone(),
            chunk_key: rec.chunk_key.clone(),
            attempt: rec.attempt,
            enqueued_at_ms: rec.enqueued_at_ms,
        }))
    }

    /// Permanently removes an order. Unknown ids (including double-acks) are
    /// a no-op reported as [`AckOutcome::Unknown`].
    pub fn ack(&self, order_id: &str) -> Result<AckOutcome, QueueError> {
        let mut state = self.state.lock().expect("queue mutex");
        if state.orders.remove(order_id).is_none() {
            return Ok(AckOutcome::Unknown);
        }
        state.ready.retain(|id| id != order_id);
        writeln!(state.journal, "A\t{order_id}").map_err(|source| QueueError::Io {
            path: self.path.clone(),
            source,
        })?;
        state.journal.flush().map_err(|source| QueueError::Io {
            path: self.path.clone(),
            source,
        })?;
        Ok(AckOutcome::Removed)
    }

    /// Orders not yet acked (ready + leased).
    pub fn outstanding(&self) -> usize {
        self.state.lock().expect("queue mutex").orders.len()
    }

    /// Orders deliverable right now (after expiring stale leases).
    pub fn visible(&self) -> usize {
        let now = self.clock.now_ms();
        let mut state = self.state.lock().expect("queue mutex");
        expire_leases(&mut state, now);
        state.ready.len()
    }

    pub fn is_drained(&self) -> bool {
        self.outstanding() == 0
    }
}

/// Moves orders with expired leases back to the ready tail, deterministically
/// by (deadline, order id).
fn expire_leases(state: &mut QueueState, now_ms: u64) {
    let mut expired: Vec<(u64, String)> = state
        .orders
        .iter()
        .filter_map(|(id, rec)| match rec.lease_deadline_ms {
            Some(deadline) if deadline <= now_ms => Some((deadline, id.clone())),
            _ => None,
        })
        .collect();
    expired.sort();
    for (_, order_id) in expired {
        if let Some(rec) = state.orders.get_mut(&order_id) {
            rec.lease_deadline_ms = None;
            state.ready.push_back(order_id);
        }
    }
}

fn order_seq(order_id: &str) -> Option<u64> {
    order_id.split('@').next()?.parse().ok()
}
