//! Worker loop: dequeue an order, run the chunk through the stage pipeline
//! (cleanse → dedup → entity-link → classify), upsert every item into the
//! index under its deterministic id, ack.
//!
//! Processing is idempotent end to end: reprocessing a chunk rewrites the
//! same documents under the same ids, the dedup register exempts an item
//! from matching itself, and a repeated item id within one pass is flagged
//! as a within-feed duplicate the same way on every pass.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use chrono::Utc;
use thiserror::Error;

use newsflow_core::cleanse::{compute_measures, extract_content, CleanseConfig};
use newsflow_core::dedup::{
    build_profile, check_and_record, dedup_code, DedupParams, DedupRegister, DedupVerdict,
};
use newsflow_core::entline::{annotate, Gazetteer, LinkParams};
use newsflow_core::events::{featurize_tokens, EventCategory, LogRegModel};
use newsflow_core::index::{DocAnnotation, DocEvent, IndexError, IndexedDoc, NewsIndex};
use newsflow_core::text::tokenize;

use crate::chunk::{ChunkError, ChunkRead, ChunkStore};
use crate::queue::{QueueError, WorkQueue};

pub struct DedupStage {
    pub params: DedupParams,
    pub register: Arc<DedupRegister>,
}

pub struct LinkerStage {
    pub gazetteer: Arc<Gazetteer>,
    pub params: LinkParams,
}

pub struct ClassifierStage {
    pub models: Vec<(EventCategory, Arc<LogRegModel>)>,
}

/// The per-worker stage pipeline. Stages are optional so partial pipelines
/// (e.g. no trained models yet) still run.
pub struct Stages {
    pub cleanse: CleanseConfig,
    pub dedup: Option<DedupStage>,
    pub linker: Option<LinkerStage>,
    pub classifier: Option<ClassifierStage>,
}

impl Stages {
    pub fn cleanse_only(cleanse: CleanseConfig) -> Self {
        Self {
            cleanse,
            dedup: None,
            linker: None,
            classifier: None,
        }
    }
}

/// Test instrumentation: abort processing after N successful upserts, as if
/// the worker died mid-chunk.
#[derive(Debug, Clone, Copy, Default)]
pub struct FaultInjection {
    pub crash_after_items: Option<usize>,
}

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("simulated worker crash after {after_items} items")]
    SimulatedCrash { after_items: usize },
}

#[derive(Debug, Error)]
pub enum WorkerError {
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Process(#[from] ProcessError),
}

/// Counts for one chunk pass; the three fields sum to the chunk's item count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProcessReport {
    pub processed: usize,
    pub duplicates: usize,
    pub rejected: usize,
}

/// Runs every item of a chunk through the stages and upserts it.
///
/// Malformed records count as rejected and processing continues; only index
/// unavailability (or an injected crash) fails the chunk. A register failure
/// fails open: the item is treated as original and processing continues.
pub fn process_chunk(
    chunk: &ChunkRead,
    stages: &Stages,
    index: &NewsIndex,
    fault: &FaultInjection,
) -> Result<ProcessReport, ProcessError> {
    let mut report = ProcessReport::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut upserted = 0usize;

    for parsed in &chunk.items {
        let raw = match parsed {
            Ok(raw) => raw,
            Err(reason) => {
                eprintln!("chunk {}: rejected record: {reason}", chunk.key);
                report.rejected += 1;
                continue;
            }
        };
        if let Some(limit) = fault.crash_after_items {
            if upserted >= limit {
                return Err(ProcessError::SimulatedCrash { after_items: limit });
            }
        }

        let clean = extract_content(raw, &stages.cleanse);
        let measures = compute_measures(&clean, raw, &stages.cleanse);
        let item_id = clean.item_id.clone();

        let verdict = if seen_ids.contains(&item_id) {
            // The same article literally repeated inside this delivery.
            DedupVerdict::duplicate_of(&item_id)
        } else if let Some(stage) = &stages.dedup {
            let profile =
                build_profile(&clean.body, stage.params.quant_rate, stage.params.min_quant);
            let code = dedup_code(&profile);
            match check_and_record(&stage.register, &code, &item_id) {
                Ok(verdict) => verdict,
                Err(e) => {
                    eprintln!(
                        "chunk {}: dedup register unavailable, failing open: {e}",
                        chunk.key
                    );
                    DedupVerdict::original()
                }
            }
        } else {
            DedupVerdict::original()
        };

        let annotations: Vec<DocAnnotation> = match &stages.linker {
            Some(stage) => annotate(&clean.body, &stage.gazetteer, &stage.params)
                .into_iter()
                .map(|a| DocAnnotation {
                    entity_id: a.entity_id,
                    confidence: a.confidence,
                })
                .collect(),
            None => Vec::new(),
        };

        let events: Vec<DocEvent> = match &stages.classifier {
            Some(stage) => {
                let tokens = tokenize(&clean.body);
                stage
                    .models
                    .iter()
                    .filter_map(|(category, model)| {
                        let fv = featurize_tokens(&tokens, &model.vocabulary);
                        let (probability, label) = model.predict(&fv);
                        label.then_some(DocEvent {
                            category: *category,
                            probability,
                        })
                    })
                    .collect()
            }
            None => Vec::new(),
        };

        index.upsert(IndexedDoc {
            item_id: item_id.clone(),
            title: clean.title,
            body: clean.body,
            source_name: clean.source_name,
            published_at: clean.fetched_at,
            is_good: measures.is_good,
            is_duplicate: verdict.is_duplicate,
            annotations,
            events,
            indexed_at: Utc::now(),
        })?;
        upserted += 1;
        seen_ids.insert(item_id);
        if verdict.is_duplicate {
            report.duplicates += 1;
        } else {
            report.processed += 1;
        }
    }
    Ok(report)
}

/// Long-running worker: dequeue, process, ack; idle-sleeps when the queue has
/// nothing visible. A processing failure leaves the order un-acked so the
/// lease expiry redelivers it.
pub fn run_worker(
    queue: &WorkQueue,
    store: &ChunkStore,
    stages: &Stages,
    index: &NewsIndex,
    shutdown: &AtomicBool,
    idle_sleep: std::time::Duration,
) -> Result<(), WorkerError> {
    while !shutdown.load(Ordering::SeqCst) {
        match queue.dequeue()? {
            Some(order) => {
                if let Err(e) = handle_order(
                    &order.chunk_key,
                    &order.order_id,
                    queue,
                    store,
                    stages,
                    index,
                ) {
                    eprintln!(
                        "order {}: processing failed, leaving for redelivery: {e}",
                        order.order_id
                    );
                }
            }
            None => std::thread::sleep(idle_sleep),
        }
    }
    Ok(())
}

/// Processes orders until the queue is fully drained (no outstanding orders).
/// Returns aggregate counts. Single-process convenience for batch runs and
/// tests.
pub fn drain_queue(
    queue: &WorkQueue,
    store: &ChunkStore,
    stages: &Stages,
    index: &NewsIndex,
) -> Result<ProcessReport, WorkerError> {
    let mut total = ProcessReport::default();
    loop {
        match queue.dequeue()? {
            Some(order) => {
                let report = handle_order(
                    &order.chunk_key,
                    &order.order_id,
                    queue,
                    store,
                    stages,
                    index,
                )?;
                total.processed += report.processed;
                total.duplicates += report.duplicates;
                total.rejected += report.rejected;
            }
            None if queue.is_drained() => break,
            None => std::thread::sleep(std::time::Duration::from_millis(10)),
        }
    }
    Ok(total)
}

fn handle_order(
    chunk_key: &crate::chunk::ChunkKey,
    order_id: &str,
    queue: &WorkQueue,
    store: &ChunkStore,
    stages: &Stages,
    index: &NewsIndex,
) -> Result<ProcessReport, WorkerError> {
    let chunk = match store.read_chunk(chunk_key) {
        Ok(chunk) => chunk,
        Err(ChunkError::NotFound { key }) => {
            // The chunk is gone; retrying forever helps nobody.
            eprintln!("order {order_id}: chunk {key} missing, acking as empty");
            queue.ack(order_id)?;
            return Ok(ProcessReport::default());
        }
        Err(e) => return Err(e.into()),
    };
    let report = process_chunk(&chunk, stages, index, &FaultInjection::default())?;
    queue.ack(order_id)?;
    Ok(report)
}
