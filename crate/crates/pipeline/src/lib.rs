//! Pipeline runtime: chunk store, durable work queue, coordinator and worker
//! loop.
//!
//! The flow mirrors a stream-processing deployment at desk scale: a single
//! coordinator polls the chunk store and enqueues one work order per new
//! chunk; workers dequeue orders, run the processing stages over each item
//! and upsert into the index; un-acked orders are redelivered after the
//! visibility timeout. At-least-once delivery composed with idempotent
//! processing yields exactly-once visible effects.

pub mod chunk;
pub mod coordinator;
pub mod lock;
pub mod queue;
pub mod watermark;
pub mod worker;

pub use chunk::{ChunkError, ChunkKey, ChunkRead, ChunkStore, MAX_CHUNK_ITEMS};
pub use coordinator::{Coordinator, CoordinatorError, TickOutcome};
pub use lock::{LockError, LockFile};
pub use queue::{AckOutcome, Clock, QueueError, SimClock, SystemClock, WorkOrder, WorkQueue};
pub use watermark::{Watermark, WatermarkError};
pub use worker::{
    drain_queue, process_chunk, run_worker, ClassifierStage, DedupStage, FaultInjection,
    LinkerStage, ProcessError, ProcessReport, Stages, WorkerError,
};
