//! Faceted inverted index over enriched news items.
//!
//! Single-process stand-in for a search cluster: one writer handle (enforced
//! by an exclusive file lock on the persistence log), many concurrent readers
//! with per-request snapshot consistency through a read-write lock. Full-text
//! ranking is BM25 (k1=1.2, b=0.75) over title+body with title term counts
//! doubled; without a query, results order by publication date descending.
//! Duplicates and low-quality docs are excluded unless the request opts in.

pub mod serve;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use fs2::FileExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::EventCategory;
use crate::text::tokenize;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
/// Title terms count double, in term frequency and in document length.
pub const TITLE_WEIGHT: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocAnnotation {
    pub entity_id: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEvent {
    pub category: EventCategory,
    pub probability: f64,
}

/// An enriched item as stored in the index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub item_id: String,
    pub title: String,
    pub body: String,
    pub source_name: String,
    pub published_at: DateTime<Utc>,
    pub is_good: bool,
    pub is_duplicate: bool,
    pub annotations: Vec<DocAnnotation>,
    pub events: Vec<DocEvent>,
    pub indexed_at: DateTime<Utc>,
}

/// The same doc minus wall-clock bookkeeping, for state comparison across
/// runs.
#[derive(Serialize)]
struct CanonicalDoc<'a> {
    item_id: &'a str,
    title: &'a str,
    body: &'a str,
    source_name: &'a str,
    published_at: &'a DateTime<Utc>,
    is_good: bool,
    is_duplicate: bool,
    annotations: &'a [DocAnnotation],
    events: &'a [DocEvent],
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("index I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("index {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("index opened read-only")]
    ReadOnly,
    #[error("index log {path} corrupt at line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// A malformed request (bad dates, out-of-range size, unknown parameter).
#[derive(Debug, Error, PartialEq)]
#[error("{0}")]
pub struct RequestError(pub String);

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRequest {
    pub q: Option<String>,
    pub company: Option<String>,
    pub event: Option<EventCategory>,
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
    pub include_duplicates: bool,
    pub include_low_quality: bool,
    pub page: usize,
    pub size: usize,
}

pub const DEFAULT_PAGE_SIZE: usize = 10;
pub const MAX_PAGE_SIZE: usize = 100;

impl Default for QueryRequest {
    fn default() -> Self {
        Self {
            q: None,
            company: None,
            event: None,
            from: None,
            to: None,
            include_duplicates: false,
            include_low_quality: false,
            page: 0,
            size: DEFAULT_PAGE_SIZE,
        }
    }
}

impl QueryRequest {
    /// Builds a request from decoded query parameters, rejecting unknown
    /// keys, malformed dates and out-of-range paging.
    pub fn from_params<'a>(
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, RequestError> {
        let mut req = QueryRequest::default();
        for (key, value) in pairs {
            match key {
                "q" => req.q = Some(value.to_string()),
                "company" => req.company = Some(value.to_string()),
                "event" => {
                    req.event =
                        Some(EventCategory::parse(value).ok_or_else(|| {
                            RequestError(format!("unknown event category: {value}"))
                        })?)
                }
                "from" => req.from = Some(parse_date(value)?),
                "to" => req.to = Some(parse_date(value)?),
                "include_duplicates" => req.include_duplicates = parse_bool(key, value)?,
                "include_low_quality" => req.include_low_quality = parse_bool(key, value)?,
                "page" => {
                    req.page = value
                        .parse()
                        .map_err(|_| RequestError(format!("bad page: {value}")))?
                }
                "size" => {
                    req.size = value
                        .parse()
                        .map_err(|_| RequestError(format!("bad size: {value}")))?
                }
                other => return Err(RequestError(format!("unknown parameter: {other}"))),
            }
        }
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<(), RequestError> {
        if self.size == 0 || self.size > MAX_PAGE_SIZE {
            return Err(RequestError(format!(
                "size must be in 1..={MAX_PAGE_SIZE}, got {}",
                self.size
            )));
        }
        Ok(())
    }
}

fn parse_date(value: &str) -> Result<DateTime<Utc>, RequestError> {
    DateTime::parse_from_rfc3339(value)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|e| RequestError(format!("malformed date {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, RequestError> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(RequestError(format!("bad boolean for {key}: {value}"))),
    }
}

/// Exact facet counts over a filtered result set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Facets {
    pub company: BTreeMap<String, u64>,
    pub event: BTreeMap<String, u64>,
    pub source: BTreeMap<String, u64>,
    pub month: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitSummary {
    pub item_id: String,
    pub title: String,
    pub source_name: String,
    pub published_at: DateTime<Utc>,
    pub annotations: Vec<DocAnnotation>,
    pub events: Vec<DocEvent>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub total: usize,
    pub hits: Vec<HitSummary>,
    pub facets: Facets,
}

struct DocRecord {
    doc: IndexedDoc,
    /// Weighted term frequencies: title counts doubled plus body counts.
    terms: HashMap<String, u32>,
    weighted_len: u64,
}

#[derive(Default)]
struct IndexState {
    docs: BTreeMap<String, DocRecord>,
    /// term -> doc_id -> weighted tf
    postings: HashMap<String, HashMap<String, u32>>,
    total_weighted_len: u64,
}

/// The index handle. Writers own the persistence log; readers replay it.
pub struct NewsIndex {
    state: RwLock<IndexState>,
    log: Option<Mutex<BufWriter<File>>>,
    log_path: Option<PathBuf>,
}

fn weighted_terms(doc: &IndexedDoc) -> (HashMap<String, u32>, u64) {
    let mut terms: HashMap<String, u32> = HashMap::new();
    let mut len = 0u64;
    for t in tokenize(&doc.title) {
        *terms.entry(t).or_insert(0) += TITLE_WEIGHT;
        len += TITLE_WEIGHT as u64;
    }
    for t in tokenize(&doc.body) {
        *terms.entry(t).or_insert(0) += 1;
        len += 1;
    }
    (terms, len)
}

/// BM25 inverse document frequency; non-negative for all df <= n.
pub fn bm25_idf(n_docs: usize, df: usize) -> f64 {
    (1.0 + (n_docs as f64 - df as f64 + 0.5) / (df as f64 + 0.5)).ln()
}

/// BM25 term saturation for one document.
pub fn bm25_term_score(tf: u32, doc_len: u64, avg_len: f64, idf: f64) -> f64 {
    let tf = tf as f64;
    idf * (tf * (BM25_K1 + 1.0))
        / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * doc_len as f64 / avg_len))
}

impl NewsIndex {
    /// A purely in-memory index (used by tests and ephemeral tooling).
    pub fn in_memory() -> Self {
        Self {
            state: RwLock::new(IndexState::default()),
            log: None,
            log_path: None,
        }
    }

    /// Opens the index directory for writing; takes the writer lock and
    /// replays the log.
    pub fn open_writer(dir: &Path) -> Result<Self, IndexError> {
        std::fs::create_dir_all(dir).map_err(|source| IndexError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let log_path = dir.join("log.jsonl");
        let file = OpenOptions::new()
            .read(true)
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|source| IndexError::Io {
                path: log_path.clone(),
                source,
            })?;
        file.try_lock_exclusive()
            .map_err(|_| IndexError::Locked(log_path.clone()))?;
        let state = replay_log(&log_path)?;
        Ok(Self {
            state: RwLock::new(state),
            log: Some(Mutex::new(BufWriter::new(file))),
            log_path: Some(log_path),
        })
    }

    /// Opens a read-only snapshot of a persisted index.
    pub fn open_reader(dir: &Path) -> Result<Self, IndexError> {
        let log_path = dir.join("log.jsonl");
        let state = if log_path.exists() {
            replay_log(&log_path)?
        } else {
            IndexState::default()
        };
        Ok(Self {
            state: RwLock::new(state),
            log: None,
            log_path: Some(log_path),
        })
    }

    pub fn len(&self) -> usize {
        self.state.read().expect("index lock").docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, item_id: &str) -> Option<IndexedDoc> {
        self.state
            .read()
            .expect("index lock")
            .docs
            .get(item_id)
            .map(|r| r.doc.clone())
    }

    pub fn all_ids(&self) -> Vec<String> {
        self.state
            .read()
            .expect("index lock")
            .docs
            .keys()
            .cloned()
            .collect()
    }

    pub fn all_docs(&self) -> Vec<IndexedDoc> {
        self.state
            .read()
            .expect("index lock")
            .docs
            .values()
            .map(|r| r.doc.clone())
            .collect()
    }

    /// Inserts or fully replaces by item id, atomically per document. The
    /// log line is flushed before the in-memory state flips, so a reader
    /// snapshot taken after upsert returns sees the write.
    pub fn upsert(&self, doc: IndexedDoc) -> Result<(), IndexError> {
        if self.log.is_none() && self.log_path.is_some() {
            return Err(IndexError::ReadOnly);
        }
        let line = self
            .log
            .as_ref()
            .map(|_| serde_json::to_string(&doc).expect("doc serializes"));
        // The log append happens under the state write lock so replay order
        // always matches in-memory order; an append failure leaves the index
        // unchanged.
        let mut state = self.state.write().expect("index lock");
        if let (Some(log), Some(line)) = (&self.log, line) {
            let mut log = log.lock().expect("log lock");
            let path = self.log_path.clone().unwrap_or_default();
            writeln!(log, "{line}").map_err(|source| IndexError::Io {
                path: path.clone(),
                source,
            })?;
            log.flush()
                .map_err(|source| IndexError::Io { path, source })?;
        }
        state.apply(doc);
        Ok(())
    }

    /// Runs a query against a consistent snapshot of the index.
    pub fn search(&self, req: &QueryRequest) -> Result<QueryResponse, RequestError> {
        req.validate()?;
        let state = self.state.read().expect("index lock");
        let n_docs = state.docs.len();
        let avg_len = if n_docs == 0 {
            0.0
        } else {
            state.total_weighted_len as f64 / n_docs as f64
        };

        // Conjunction of all present filters, full-text aside.
        let filtered: Vec<&DocRecord> = state
            .docs
            .values()
            .filter(|r| passes_filters(&r.doc, req))
            .collect();

        // (doc, score) in final rank order.
        let ranked: Vec<(&DocRecord, Option<f64>)> = match &req.q {
            Some(q) => {
                let terms = query_terms(q);
                let in_filter: HashSet<&str> =
                    filtered.iter().map(|r| r.doc.item_id.as_str()).collect();
                let mut scores: HashMap<&str, f64> = HashMap::new();
                for term in &terms {
                    if let Some(postings) = state.postings.get(term) {
                        let idf = bm25_idf(n_docs, postings.len());
                        for (doc_id, tf) in postings {
                            if let Some(id) = in_filter.get(doc_id.as_str()) {
                                let rec = &state.docs[*id];
                                *scores.entry(*id).or_insert(0.0) +=
                                    bm25_term_score(*tf, rec.weighted_len, avg_len, idf);
                            }
                        }
                    }
                }
                let mut hits: Vec<(&DocRecord, Option<f64>)> = scores
                    .into_iter()
                    .map(|(id, s)| (&state.docs[id], Some(s)))
                    .collect();
                hits.sort_by(|a, b| {
                    b.1.partial_cmp(&a.1)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then_with(|| a.0.doc.item_id.cmp(&b.0.doc.item_id))
                });
                hits
            }
            None => {
                let mut hits: Vec<(&DocRecord, Option<f64>)> =
                    filtered.iter().map(|r| (*r, None)).collect();
                hits.sort_by(|a, b| {
                    b.0.doc
                        .published_at
                        .cmp(&a.0.doc.published_at)
                        .then_with(|| a.0.doc.item_id.cmp(&b.0.doc.item_id))
                });
                hits
            }
        };

        let facets = facet_counts(ranked.iter().map(|(r, _)| &r.doc));
        let total = ranked.len();
        let start = req.page.saturating_mul(req.size).min(total);
        let end = (start + req.size).min(total);
        let hits = ranked[start..end]
            .iter()
            .map(|(r, score)| HitSummary {
                item_id: r.doc.item_id.clone(),
                title: r.doc.title.clone(),
                source_name: r.doc.source_name.clone(),
                published_at: r.doc.published_at,
                annotations: r.doc.annotations.clone(),
                events: r.doc.events.clone(),
                score: *score,
            })
            .collect();
        Ok(QueryResponse {
            total,
            hits,
            facets,
        })
    }

    /// Deterministic dump of the doc set minus wall-clock fields; two runs
    /// that produced the same documents export identical bytes.
    pub fn canonical_export(&self) -> Vec<u8> {
        let state = self.state.read().expect("index lock");
        let mut out = Vec::new();
        for (id, rec) in &state.docs {
            let canonical = CanonicalDoc {
                item_id: &rec.doc.item_id,
                title: &rec.doc.title,
                body: &rec.doc.body,
                source_name: &rec.doc.source_name,
                published_at: &rec.doc.published_at,
                is_good: rec.doc.is_good,
                is_duplicate: rec.doc.is_duplicate,
                annotations: &rec.doc.annotations,
                events: &rec.doc.events,
            };
            out.extend_from_slice(id.as_bytes());
            out.push(b'\t');
            out.extend_from_slice(serde_json::to_string(&canonical).unwrap().as_bytes());
            out.push(b'\n');
        }
        out
    }
}

impl IndexState {
    fn apply(&mut self, doc: IndexedDoc) {
        if let Some(old) = self.docs.remove(&doc.item_id) {
            for term in old.terms.keys() {
                if let Some(postings) = self.postings.get_mut(term) {
                    postings.remove(&doc.item_id);
                    if postings.is_empty() {
                        self.postings.remove(term);
                    }
                }
            }
            self.total_weighted_len -= old.weighted_len;
        }
        let (terms, weighted_len) = weighted_terms(&doc);
        for (term, tf) in &terms {
            self.postings
                .entry(term.clone())
                .or_default()
                .insert(doc.item_id.clone(), *tf);
        }
        self.total_weighted_len += weighted_len;
        self.docs.insert(
            doc.item_id.clone(),
            DocRecord {
                doc,
                terms,
                weighted_len,
            },
        );
    }
}

/// Query tokens, deduplicated preserving first occurrence.
pub fn query_terms(q: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    tokenize(q)
        .into_iter()
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

fn passes_filters(doc: &IndexedDoc, req: &QueryRequest) -> bool {
    if doc.is_duplicate && !req.include_duplicates {
        return false;
    }
    if !doc.is_good && !req.include_low_quality {
        return false;
    }
    if let Some(company) = &req.company {
        if !doc.annotations.iter().any(|a| &a.entity_id == company) {
            return false;
        }
    }
    if let Some(event) = req.event {
        if !doc.events.iter().any(|e| e.category == event) {
            return false;
        }
    }
    if let Some(from) = req.from {
        if doc.published_at < from {
            return false;
        }
    }
    if let Some(to) = req.to {
        if doc.published_at > to {
            return false;
        }
    }
    true
}

/// Exact per-value counts; a doc counts once per distinct company / event it
/// carries, once for its source, once for its publication month.
pub fn facet_counts<'a>(docs: impl Iterator<Item = &'a IndexedDoc>) -> Facets {
    let mut facets = Facets::default();
    for doc in docs {
        let companies: HashSet<&str> = doc
            .annotations
            .iter()
            .map(|a| a.entity_id.as_str())
            .collect();
        for c in companies {
            *facets.company.entry(c.to_string()).or_insert(0) += 1;
        }
        let events: HashSet<&str> = doc.events.iter().map(|e| e.category.name()).collect();
        for e in events {
            *facets.event.entry(e.to_string()).or_insert(0) += 1;
        }
        *facets.source.entry(doc.source_name.clone()).or_insert(0) += 1;
        *facets
            .month
            .entry(doc.published_at.format("%Y-%m").to_string())
            .or_insert(0) += 1;
    }
    facets
}

fn replay_log(path: &Path) -> Result<IndexState, IndexError> {
    let file = File::open(path).map_err(|source| IndexError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut state = IndexState::default();
    let mut lines = reader.lines().enumerate().peekable();
    while let Some((lineno, line)) = lines.next() {
        let line = line.map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<IndexedDoc>(&line) {
            Ok(doc) => state.apply(doc),
            Err(e) => {
                // A torn final line (crash mid-append) is dropped; corruption
                // earlier in the log is fatal.
                if lines.peek().is_none() {
                    break;
                }
                return Err(IndexError::Corrupt {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(state)
}
