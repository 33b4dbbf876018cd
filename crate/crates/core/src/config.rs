//! Pipeline configuration: one JSON document, strictly validated.
//!
//! Unknown keys are rejected, type mismatches name the offending key (via
//! path-tracking deserialization), and range checks run before any command
//! acts. Only the two store paths are required; everything else defaults.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cleanse::CleanseConfig;
use crate::dedup::DedupParams;
use crate::entline::{default_cue_words, default_legal_suffixes, ConfidenceWeights, LinkParams};
use crate::events::TrainParams;
use crate::text::{STOPWORDS_EN, STOPWORDS_IT};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config key `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    /// Coordinator poll period. Production default one minute; test profiles
    /// use much shorter values.
    #[serde(default = "default_poll_interval_ms")]
    pub poll_interval_ms: u64,
    #[serde(default = "default_visibility_timeout_ms")]
    pub visibility_timeout_ms: u64,
    #[serde(default = "default_worker_concurrency")]
    pub worker_concurrency: usize,
    pub chunk_store_path: PathBuf,
    pub index_path: PathBuf,
    /// Work-queue journal location; defaults to a sibling of the index.
    #[serde(default)]
    pub queue_path: Option<PathBuf>,
    #[serde(default)]
    pub cleanse: CleanseConfig,
    #[serde(default)]
    pub dedup: DedupSection,
    #[serde(default)]
    pub entity_linking: EntityLinkingSection,
    #[serde(default)]
    pub events: EventsSection,
    #[serde(default)]
    pub serve: ServeSection,
}

fn default_poll_interval_ms() -> u64 {
    60_000
}
fn default_visibility_timeout_ms() -> u64 {
    30_000
}
fn default_worker_concurrency() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DedupSection {
    pub enabled: bool,
    pub quant_rate: f64,
    pub min_quant: u64,
    pub register_path: Option<PathBuf>,
}

impl Default for DedupSection {
    fn default() -> Self {
        let params = DedupParams::default();
        Self {
            enabled: true,
            quant_rate: params.quant_rate,
            min_quant: params.min_quant,
            register_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntityLinkingSection {
    pub enabled: bool,
    pub threshold: f64,
    /// λ1, λ2, λ3 over (commonness, context similarity, NER score).
    pub lambda: [f64; 3],
    pub cue_words: Vec<String>,
    pub legal_suffixes: Vec<String>,
    pub max_ngram: usize,
    pub include_generic: bool,
    pub gazetteer_path: Option<PathBuf>,
}

impl Default for EntityLinkingSection {
    fn default() -> Self {
        Self {
            enabled: true,
            threshold: 0.6,
            lambda: [0.5, 0.3, 0.2],
            cue_words: default_cue_words(),
            legal_suffixes: default_legal_suffixes(),
            max_ngram: 6,
            include_generic: false,
            gazetteer_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventsSection {
    pub enabled: bool,
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub decision_threshold: f64,
    pub models_path: Option<PathBuf>,
    /// "italian", "english" or "none".
    pub stopwords: String,
}

impl Default for EventsSection {
    fn default() -> Self {
        Self {
            enabled: true,
            l2: 1e-4,
            learning_rate: 0.5,
            epochs: 200,
            decision_threshold: 0.5,
            models_path: None,
            stopwords: "italian".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServeSection {
    pub port: u16,
    pub page_size: usize,
    pub threads: usize,
}

impl Default for ServeSection {
    fn default() -> Self {
        Self {
            port: 8080,
            page_size: 10,
            threads: 8,
        }
    }
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let data = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&data)
    }

    pub fn from_json(data: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(data);
        let config: AppConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
                key: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn dump(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.poll_interval_ms == 0 {
            return Err(invalid("poll_interval_ms", "must be > 0"));
        }
        if self.visibility_timeout_ms == 0 {
            return Err(invalid("visibility_timeout_ms", "must be > 0"));
        }
        if self.worker_concurrency == 0 {
            return Err(invalid("worker_concurrency", "must be >= 1"));
        }
        if !(self.dedup.quant_rate > 0.0 && self.dedup.quant_rate <= 1.0) {
            return Err(invalid("dedup.quant_rate", "must be in (0, 1]"));
        }
        if self.dedup.min_quant < 2 {
            return Err(invalid("dedup.min_quant", "must be >= 2"));
        }
        if !(0.0..=1.0).contains(&self.entity_linking.threshold) {
            return Err(invalid("entity_linking.threshold", "must be in [0, 1]"));
        }
        let lambda_sum: f64 = self.entity_linking.lambda.iter().sum();
        if (lambda_sum - 1.0).abs() > 1e-9 || self.entity_linking.lambda.iter().any(|l| *l < 0.0) {
            return Err(invalid(
                "entity_linking.lambda",
                format!("must be non-negative and sum to 1, got sum {lambda_sum}"),
            ));
        }
        if self.entity_linking.max_ngram == 0 {
            return Err(invalid("entity_linking.max_ngram", "must be >= 1"));
        }
        if self.events.epochs == 0 {
            return Err(invalid("events.epochs", "must be >= 1"));
        }
        if self.events.learning_rate <= 0.0 {
            return Err(invalid("events.learning_rate", "must be > 0"));
        }
        if self.events.l2 < 0.0 {
            return Err(invalid("events.l2", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.events.decision_threshold) {
            return Err(invalid("events.decision_threshold", "must be in [0, 1]"));
        }
        if !matches!(
            self.events.stopwords.as_str(),
            "italian" | "english" | "none"
        ) {
            return Err(invalid(
                "events.stopwords",
                "must be one of: italian, english, none",
            ));
        }
        if self.serve.page_size == 0 || self.serve.page_size > crate::index::MAX_PAGE_SIZE {
            return Err(invalid(
                "serve.page_size",
                format!("must be in 1..={}", crate::index::MAX_PAGE_SIZE),
            ));
        }
        if self.serve.threads == 0 {
            return Err(invalid("serve.threads", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.cleanse.min_text_density) {
            return Err(invalid("cleanse.min_text_density", "must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.cleanse.block_density_threshold) {
            return Err(invalid(
                "cleanse.block_density_threshold",
                "must be in [0, 1]",
            ));
        }
        Ok(())
    }

    /// Queue journal path, defaulting next to the index directory.
    pub fn queue_path(&self) -> PathBuf {
        self.queue_path
            .clone()
            .unwrap_or_else(|| self.index_path.join("queue.journal"))
    }

    pub fn dedup_params(&self) -> DedupParams {
        DedupParams {
            quant_rate: self.dedup.quant_rate,
            min_quant: self.dedup.min_quant,
        }
    }

    pub fn link_params(&self) -> LinkParams {
        LinkParams {
            threshold: self.entity_linking.threshold,
            weights: ConfidenceWeights {
                commonness: self.entity_linking.lambda[0],
                context: self.entity_linking.lambda[1],
                ner: self.entity_linking.lambda[2],
            },
            cue_words: self.entity_linking.cue_words.clone(),
            legal_suffixes: self.entity_linking.legal_suffixes.clone(),
            max_ngram: self.entity_linking.max_ngram,
            include_generic: self.entity_linking.include_generic,
        }
    }

    pub fn train_params(&self, seed: u64) -> TrainParams {
        TrainParams {
            l2: self.events.l2,
            epochs: self.events.epochs,
            learning_rate: self.events.learning_rate,
            seed,
        }
    }

    pub fn stopword_set(&self) -> HashSet<String> {
        let words: &[&str] = match self.events.stopwords.as_str() {
            "italian" => STOPWORDS_IT,
            "english" => STOPWORDS_EN,
            _ => &[],
        };
        words.iter().map(|w| w.to_string()).collect()
    }
}
