//! Company entity linking: gazetteer spotting, feature-based disambiguation,
//! and confidence-threshold tuning.
//!
//! The flow is spot → score → disambiguate → filter: mentions come from
//! greedy longest alias matching, every candidate entity is scored by a
//! convex combination of alias commonness, context cosine similarity and a
//! heuristic company-NER feature, and only annotations at or above the
//! configured confidence threshold survive.

pub mod gazetteer;
pub mod score;
pub mod spot;
pub mod tune;

use serde::{Deserialize, Serialize};

pub use gazetteer::{
    default_legal_suffixes, EntityType, Gazetteer, GazetteerEntry, GazetteerError,
};
pub use score::{
    context_similarity, disambiguate, doc_term_vector, ner_company_score, CandidateAnnotation,
    ConfidenceWeights, ScoredCandidate,
};
pub use spot::{spot_mentions, Mention};
pub use tune::{f_beta, tune_threshold, SweepPoint, ThresholdReport, TuneError};

use crate::text::tokenize_spans;
use score::ner_score_with_tokens;

/// A mention resolved to an entity with confidence at or above the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub entity_id: String,
    pub confidence: f64,
}

/// Entity-linking knobs; defaults follow the module contract.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    /// Minimum confidence for an annotation to be emitted.
    pub threshold: f64,
    pub weights: ConfidenceWeights,
    pub cue_words: Vec<String>,
    pub legal_suffixes: Vec<String>,
    /// Longest alias n-gram attempted while spotting.
    pub max_ngram: usize,
    /// Emit generic (non-company) entities too.
    pub include_generic: bool,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            threshold: 0.6,
            weights: ConfidenceWeights::default(),
            cue_words: default_cue_words(),
            legal_suffixes: default_legal_suffixes(),
            max_ngram: 6,
            include_generic: false,
        }
    }
}

pub fn default_cue_words() -> Vec<String> {
    ["azienda", "company", "società", "gruppo"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Full entity linking over a cleansed text: spot, disambiguate each mention,
/// filter by entity type and threshold. Annotations come back sorted by start
/// offset and never overlap.
pub fn annotate(text: &str, gazetteer: &Gazetteer, params: &LinkParams) -> Vec<Annotation> {
    let tokens = tokenize_spans(text);
    let mentions = spot::spot_in_tokens(text, &tokens, gazetteer, params.max_ngram);
    if mentions.is_empty() {
        return Vec::new();
    }
    let doc_vector = doc_term_vector(text);
    let mut annotations = Vec::new();
    for mention in mentions {
        let Some((_, alias_candidates)) = gazetteer.candidates(&mention.surface) else {
            continue;
        };
        let ner = ner_score_with_tokens(
            text,
            &tokens,
            &mention,
            &params.cue_words,
            &params.legal_suffixes,
        );
        let scored: Vec<ScoredCandidate> = alias_candidates
            .iter()
            .map(|c| {
                let entry = gazetteer.entry(c.entry_index);
                ScoredCandidate {
                    entity_id: entry.entity_id.clone(),
                    commonness: c.commonness,
                    context_sim: context_similarity(&doc_vector, &entry.context_terms),
                    ner_score: ner,
                }
            })
            .collect();
        let best = disambiguate(&mention, &scored, &params.weights);
        let winner_index = alias_candidates
            .iter()
            .find(|c| gazetteer.entry(c.entry_index).entity_id == best.entity_id)
            .expect("winner came from candidates")
            .entry_index;
        let entry = gazetteer.entry(winner_index);
        if entry.entity_type != EntityType::Company && !params.include_generic {
            continue;
        }
        if best.confidence >= params.threshold {
            annotations.push(Annotation {
                start: mention.start,
                end: mention.end,
                surface: mention.surface,
                entity_id: best.entity_id,
                confidence: best.confidence,
            });
        }
    }
    annotations.sort_by_key(|a| a.start);
    annotations
}

/// One line of the annotated dev-set file used for threshold tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevAnnotation {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub entity_id: String,
    pub gold: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

/// Parses a dev-set JSONL file into (confidence, gold) pairs; lines without a
/// confidence are rejected with their line number.
pub fn load_dev_annotations(data: &str) -> Result<Vec<(f64, bool)>, String> {
    let mut out = Vec::new();
    for (lineno, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ann: DevAnnotation = serde_json::from_str(line)
            .map_err(|e| format!("dev annotation line {}: {e}", lineno + 1))?;
        let confidence = ann
            .confidence
            .ok_or_else(|| format!("dev annotation line {}: missing confidence", lineno + 1))?;
        out.push((confidence, ann.gold));
    }
    Ok(out)
}
