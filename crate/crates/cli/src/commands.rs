//! Command implementations behind the CLI surface.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use chrono::Utc;

use newsflow_core::config::AppConfig;
use newsflow_core::dedup::DedupRegister;
use newsflow_core::entline::{load_dev_annotations, tune_threshold, Gazetteer};
use newsflow_core::events::{
    boolean_retrieve, cross_validate, expand_seeds, featurize_tokens, load_labeled_docs,
    sample_training_pool, train_logreg, BooleanQuery, EmbeddingTable, EventCategory, ModelFile,
    Vocabulary,
};
use newsflow_core::index::{serve::serve, NewsIndex, QueryRequest};
use newsflow_core::item::RawNewsItem;
use newsflow_core::text::tokenize;
use newsflow_pipeline::{
    run_worker, ChunkKey, ChunkStore, ClassifierStage, Coordinator, DedupStage, LinkerStage,
    Stages, SystemClock, WorkQueue,
};

pub fn verbose_log(verbose: bool, message: impl AsRef<str>) {
    if verbose {
        eprintln!("newsflow: {}", message.as_ref());
    }
}

/// Splits an items file (one JSON news item per line) into chunk files.
pub fn ingest(config: &AppConfig, input: &Path, chunk_size: usize, gzip: bool) -> Result<usize> {
    if chunk_size == 0 || chunk_size > newsflow_pipeline::MAX_CHUNK_ITEMS {
        bail!(
            "chunk size must be in 1..={}",
            newsflow_pipeline::MAX_CHUNK_ITEMS
        );
    }
    let data = std::fs::read_to_string(input)
        .with_context(|| format!("reading items file {}", input.display()))?;
    let mut items = Vec::new();
    for (lineno, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: RawNewsItem = serde_json::from_str(line)
            .with_context(|| format!("items file line {}", lineno + 1))?;
        item.validate()
            .map_err(|e| anyhow!("items file line {}: {e}", lineno + 1))?;
        items.push(item);
    }
    if items.is_empty() {
        bail!("items file {} is empty", input.display());
    }
    let store = ChunkStore::open(&config.chunk_store_path)?;
    let now = Utc::now();
    let mut written = 0usize;
    for (idx, batch) in items.chunks(chunk_size).enumerate() {
        let key = ChunkKey::compose(now, "ingest", idx as u64);
        store.write_chunk(&key, batch, gzip)?;
        written += 1;
    }
    Ok(written)
}

/// Runs the coordinator: forever by default, one tick with `once`.
pub fn coordinator(config: &AppConfig, once: bool, verbose: bool) -> Result<()> {
    let store = ChunkStore::open(&config.chunk_store_path)?;
    let queue = Arc::new(WorkQueue::open(
        &config.queue_path(),
        config.visibility_timeout_ms,
        Arc::new(SystemClock),
    )?);
    let coordinator = Coordinator::new(
        store,
        queue,
        &config.index_path.join("watermark.json"),
        &config.index_path.join("coordinator.lock"),
    )?;
    if once {
        let outcome = coordinator.tick()?;
        println!(
            "{}",
            serde_json::json!({
                "orders_enqueued": outcome.orders_enqueued,
                "watermark": outcome.watermark.last_key.map(|k| k.to_string()),
            })
        );
        return Ok(());
    }
    verbose_log(
        verbose,
        format!("coordinator polling every {} ms", config.poll_interval_ms),
    );
    let shutdown = AtomicBool::new(false);
    coordinator.run(
        std::time::Duration::from_millis(config.poll_interval_ms),
        &shutdown,
    )?;
    Ok(())
}

/// Builds the stage pipeline from config (register, gazetteer, models).
pub fn build_stages(config: &AppConfig) -> Result<Stages> {
    let dedup = if config.dedup.enabled {
        let register_path = config
            .dedup
            .register_path
            .clone()
            .unwrap_or_else(|| config.index_path.join("register.log"));
        Some(DedupStage {
            params: config.dedup_params(),
            register: Arc::new(DedupRegister::open(&register_path)?),
        })
    } else {
        None
    };
    let linker = match (
        &config.entity_linking.gazetteer_path,
        config.entity_linking.enabled,
    ) {
        (Some(path), true) => Some(LinkerStage {
            gazetteer: Arc::new(Gazetteer::load(
                path,
                &config.entity_linking.legal_suffixes,
            )?),
            params: config.link_params(),
        }),
        (None, true) => {
            eprintln!("newsflow: entity linking enabled but no gazetteer_path; stage skipped");
            None
        }
        _ => None,
    };
    let classifier = match (&config.events.models_path, config.events.enabled) {
        (Some(dir), true) if dir.is_dir() => {
            let mut models = Vec::new();
            let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            entries.sort();
            for path in entries {
                let file = ModelFile::load(&path).map_err(|e| anyhow!(e))?;
                let category = EventCategory::parse(&file.category)
                    .ok_or_else(|| anyhow!("model {} has unknown category", path.display()))?;
                // The model file's threshold wins: it was set at train time
                // and may have been tuned per category since.
                models.push((category, Arc::new(file.model)));
            }
            if models.is_empty() {
                None
            } else {
                Some(ClassifierStage { models })
            }
        }
        _ => None,
    };
    Ok(Stages {
        cleanse: config.cleanse.clone(),
        dedup,
        linker,
        classifier,
    })
}

/// Runs N worker threads; with `drain`, exits when the queue is empty.
pub fn worker(config: &AppConfig, concurrency: usize, drain: bool, verbose: bool) -> Result<()> {
    let concurrency = if concurrency == 0 {
        config.worker_concurrency
    } else {
        concurrency
    };
    let store = ChunkStore::open(&config.chunk_store_path)?;
    let queue = Arc::new(WorkQueue::open(
        &config.queue_path(),
        config.visibility_timeout_ms,
        Arc::new(SystemClock),
    )?);
    let stages = Arc::new(build_stages(config)?);
    let index = Arc::new(NewsIndex::open_writer(&config.index_path)?);
    verbose_log(
        verbose,
        format!("starting {concurrency} workers (drain={drain})"),
    );
    let mut handles = Vec::new();
    for _ in 0..concurrency {
        let queue = Arc::clone(&queue);
        let store = store.clone();
        let stages = Arc::clone(&stages);
        let index = Arc::clone(&index);
        handles.push(std::thread::spawn(move || -> Result<ProcessTotals> {
            if drain {
                let report = newsflow_pipeline::drain_queue(&queue, &store, &stages, &index)?;
                Ok(ProcessTotals {
                    processed: report.processed,
                    duplicates: report.duplicates,
                    rejected: report.rejected,
                })
            } else {
                let shutdown = AtomicBool::new(false);
                run_worker(
                    &queue,
                    &store,
                    &stages,
                    &index,
                    &shutdown,
                    std::time::Duration::from_millis(50),
                )?;
                Ok(ProcessTotals::default())
            }
        }));
    }
    let mut totals = ProcessTotals::default();
    for handle in handles {
        let t = handle
            .join()
            .map_err(|_| anyhow!("worker thread panicked"))??;
        totals.processed += t.processed;
        totals.duplicates += t.duplicates;
        totals.rejected += t.rejected;
    }
    if drain {
        println!(
            "{}",
            serde_json::json!({
                "processed": totals.processed,
                "duplicates": totals.duplicates,
                "rejected": totals.rejected,
                "indexed_docs": index.len(),
            })
        );
    }
    Ok(())
}

#[derive(Default)]
struct ProcessTotals {
    processed: usize,
    duplicates: usize,
    rejected: usize,
}

/// Serves the query API over the persisted index.
pub fn serve_index(config: &AppConfig, port: Option<u16>, verbose: bool) -> Result<()> {
    let index = Arc::new(NewsIndex::open_reader(&config.index_path)?);
    let port = port.unwrap_or(config.serve.port);
    let addr = format!("127.0.0.1:{port}");
    let handle = serve(index, &addr, config.serve.threads)?;
    verbose_log(verbose, format!("serving on http://{}", handle.addr()));
    println!(
        "{}",
        serde_json::json!({"listening": handle.addr().to_string()})
    );
    // Foreground service: block until killed.
    loop {
        std::thread::sleep(std::time::Duration::from_secs(3600));
    }
}

pub fn train(
    config: &AppConfig,
    category: &str,
    data: &Path,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let category =
        EventCategory::parse(category).ok_or_else(|| anyhow!("unknown category {category:?}"))?;
    let raw = std::fs::read_to_string(data)
        .with_context(|| format!("reading labeled data {}", data.display()))?;
    let docs = load_labeled_docs(&raw).map_err(|e| anyhow!(e))?;
    let stopwords = config.stopword_set();
    let tokenized: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.text)).collect();
    let vocabulary = Vocabulary::build(&tokenized, &stopwords);
    let training: Vec<_> = tokenized
        .iter()
        .zip(docs.iter())
        .map(|(tokens, doc)| (featurize_tokens(tokens, &vocabulary), doc.label))
        .collect();
    let mut model = train_logreg(&training, vocabulary, &config.train_params(seed))?;
    model.decision_threshold = config.events.decision_threshold;

    let out_path = match out {
        Some(path) => path.to_path_buf(),
        None => {
            let dir = config
                .events
                .models_path
                .clone()
                .ok_or_else(|| anyhow!("no --out and no events.models_path in config"))?;
            std::fs::create_dir_all(&dir)?;
            dir.join(format!("{}.json", category.name()))
        }
    };
    ModelFile::new(category, model)
        .save(&out_path)
        .map_err(|e| anyhow!(e))?;
    println!(
        "{}",
        serde_json::json!({
            "category": category.name(),
            "docs": docs.len(),
            "positives": docs.iter().filter(|d| d.label).count(),
            "model": out_path,
        })
    );
    Ok(())
}

pub fn cross_validate_cmd(
    config: &AppConfig,
    category: &str,
    data: &Path,
    folds: usize,
    seed: u64,
) -> Result<()> {
    let category =
        EventCategory::parse(category).ok_or_else(|| anyhow!("unknown category {category:?}"))?;
    let raw = std::fs::read_to_string(data)
        .with_context(|| format!("reading labeled data {}", data.display()))?;
    let docs = load_labeled_docs(&raw).map_err(|e| anyhow!(e))?;
    let report = cross_validate(
        category.name(),
        &docs,
        folds,
        seed,
        &config.train_params(seed),
        &config.stopword_set(),
    )?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn expand(seeds_file: &Path, embeddings_file: &Path, top_k: usize) -> Result<()> {
    let seeds_raw = std::fs::read_to_string(seeds_file)
        .with_context(|| format!("reading seeds {}", seeds_file.display()))?;
    let seeds: Vec<String> = seeds_raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if seeds.is_empty() {
        bail!("seeds file {} is empty", seeds_file.display());
    }
    let table = EmbeddingTable::load(embeddings_file)?;
    let report = expand_seeds(&seeds, &table, top_k)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn retrieve(
    query_file: &Path,
    corpus_path: &Path,
    sample: Option<usize>,
    seed: u64,
) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct QueryFile {
        groups: Vec<Vec<String>>,
    }
    let raw = std::fs::read_to_string(query_file)
        .with_context(|| format!("reading query {}", query_file.display()))?;
    let parsed: QueryFile = serde_json::from_str(&raw)
        .with_context(|| format!("parsing query {}", query_file.display()))?;
    let query = BooleanQuery::new(parsed.groups).map_err(|e| anyhow!(e))?;

    // Corpus: a labeled-docs JSONL file ({doc_id, text, ...} per line).
    let corpus_raw = std::fs::read_to_string(corpus_path)
        .with_context(|| format!("reading corpus {}", corpus_path.display()))?;
    let docs = load_labeled_docs(&corpus_raw).map_err(|e| anyhow!(e))?;
    let matches: BTreeSet<String> = boolean_retrieve(
        &query,
        docs.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())),
    );
    let selected = match sample {
        Some(n) => sample_training_pool(&matches, n, seed),
        None => matches.iter().cloned().collect(),
    };
    println!(
        "{}",
        serde_json::json!({
            "matched": matches.len(),
            "sampled": selected.len(),
            "doc_ids": selected,
        })
    );
    Ok(())
}

pub fn tune_threshold_cmd(annotations: &Path, beta: f64) -> Result<()> {
    if beta <= 0.0 {
        bail!("beta must be > 0");
    }
    let raw = std::fs::read_to_string(annotations)
        .with_context(|| format!("reading annotations {}", annotations.display()))?;
    let scored = load_dev_annotations(&raw).map_err(|e| anyhow!(e))?;
    let report = tune_threshold(&scored, beta)?;
    // The sweep can be long; print the summary plus sweep length.
    println!(
        "{}",
        serde_json::json!({
            "threshold": report.threshold,
            "precision": report.precision,
            "recall": report.recall,
            "f_beta": report.f_beta,
            "beta": report.beta,
            "sweep_points": report.sweep.len(),
        })
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn query(
    config: &AppConfig,
    q: Option<String>,
    company: Option<String>,
    event: Option<String>,
    from: Option<String>,
    to: Option<String>,
    include_duplicates: bool,
    include_low_quality: bool,
    page: usize,
    size: Option<usize>,
) -> Result<()> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    if let Some(v) = q {
        pairs.push(("q".into(), v));
    }
    if let Some(v) = company {
        pairs.push(("company".into(), v));
    }
    if let Some(v) = event {
        pairs.push(("event".into(), v));
    }
    if let Some(v) = from {
        pairs.push(("from".into(), v));
    }
    if let Some(v) = to {
        pairs.push(("to".into(), v));
    }
    if include_duplicates {
        pairs.push(("include_duplicates".into(), "true".into()));
    }
    if include_low_quality {
        pairs.push(("include_low_quality".into(), "true".into()));
    }
    pairs.push(("page".into(), page.to_string()));
    pairs.push((
        "size".into(),
        size.unwrap_or(config.serve.page_size).to_string(),
    ));
    let request = QueryRequest::from_params(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let index = NewsIndex::open_reader(&config.index_path)?;
    let response = index.search(&request)?;
    println!("{}", serde_json::to_string_pretty(&response)?);
    Ok(())
}
