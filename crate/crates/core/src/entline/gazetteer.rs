//! Gazetteer loading and alias normalization.
//!
//! The gazetteer is trusted configuration: one JSON entry per line, loaded
//! fail-fast with the offending line number on any malformed record. Aliases
//! are indexed case-insensitively both as written and with trailing legal
//! suffixes stripped, so "ACME S.p.A." and "ACME" resolve to the same entry.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityType {
    Company,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub entity_id: String,
    pub canonical_name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Prior P(entity | alias) for each alias; the canonical name defaults
    /// to 1.0 when not listed.
    #[serde(default)]
    pub alias_commonness: HashMap<String, f64>,
    /// Weighted context terms used for cosine disambiguation.
    #[serde(default)]
    pub context_terms: HashMap<String, f64>,
    pub entity_type: EntityType,
}

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("cannot read gazetteer {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("gazetteer line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("alias \"{alias}\": commonness over entries sums to {sum:.3} > 1")]
    CommonnessSum { alias: String, sum: f64 },
}

/// A candidate entry for a spotted alias.
#[derive(Debug, Clone, Copy)]
pub struct AliasCandidate {
    pub entry_index: usize,
    pub commonness: f64,
}

/// Immutable alias dictionary, shareable across workers.
#[derive(Debug)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    by_alias: HashMap<String, Vec<AliasCandidate>>,
    suffixes: Vec<String>,
}

impl Gazetteer {
    /// Loads a gazetteer file (one JSON object per line). `legal_suffixes`
    /// are the forms stripped during normalization, e.g. "S.p.A.", "Srl".
    pub fn load(path: &Path, legal_suffixes: &[String]) -> Result<Self, GazetteerError> {
        let data = std::fs::read_to_string(path).map_err(|source| GazetteerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_jsonl(&data, legal_suffixes)
    }

    pub fn from_jsonl(data: &str, legal_suffixes: &[String]) -> Result<Self, GazetteerError> {
        let mut entries = Vec::new();
        for (lineno, line) in data.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: GazetteerEntry =
                serde_json::from_str(line).map_err(|e| GazetteerError::Line {
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            for (alias, c) in &entry.alias_commonness {
                if !(*c > 0.0 && *c <= 1.0) {
                    return Err(GazetteerError::Line {
                        line: lineno + 1,
                        message: format!(
                            "commonness for alias \"{alias}\" must be in (0,1], got {c}"
                        ),
                    });
                }
            }
            entries.push(entry);
        }
        Self::build(entries, legal_suffixes)
    }

    pub fn build(
        entries: Vec<GazetteerEntry>,
        legal_suffixes: &[String],
    ) -> Result<Self, GazetteerError> {
        // Declared commonness per alias must not exceed 1 across entries.
        let mut sums: HashMap<String, f64> = HashMap::new();
        for entry in &entries {
            for (alias, c) in &entry.alias_commonness {
                *sums.entry(alias.to_lowercase()).or_insert(0.0) += c;
            }
        }
        if let Some((alias, sum)) = sums
            .iter()
            .filter(|(_, s)| **s > 1.0 + 1e-9)
            .min_by(|a, b| a.0.cmp(b.0))
        {
            return Err(GazetteerError::CommonnessSum {
                alias: alias.clone(),
                sum: *sum,
            });
        }

        let suffixes: Vec<String> = legal_suffixes.iter().map(|s| normalize_suffix(s)).collect();
        let mut by_alias: HashMap<String, Vec<AliasCandidate>> = HashMap::new();
        for (idx, entry) in entries.iter().enumerate() {
            let mut surfaces: Vec<&String> = entry.aliases.iter().collect();
            surfaces.push(&entry.canonical_name);
            for surface in surfaces {
                let commonness = entry.alias_commonness.get(surface).copied().unwrap_or(1.0);
                let mut keys = vec![surface.to_lowercase()];
                let stripped = normalize_alias(surface, &suffixes);
                if !stripped.is_empty() && !keys.contains(&stripped) {
                    keys.push(stripped);
                }
                for key in keys {
                    let bucket = by_alias.entry(key).or_default();
                    if !bucket.iter().any(|c| c.entry_index == idx) {
                        bucket.push(AliasCandidate {
                            entry_index: idx,
                            commonness,
                        });
                    }
                }
            }
        }
        Ok(Self {
            entries,
            by_alias,
            suffixes,
        })
    }

    pub fn entry(&self, index: usize) -> &GazetteerEntry {
        &self.entries[index]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    /// Candidates for a surface form, trying the plain lowercase key first
    /// and the suffix-stripped key second.
    pub fn candidates(&self, surface: &str) -> Option<(&str, &[AliasCandidate])> {
        let plain = surface.to_lowercase();
        if let Some((key, bucket)) = self.by_alias.get_key_value(&plain) {
            return Some((key.as_str(), bucket.as_slice()));
        }
        let stripped = normalize_alias(surface, &self.suffixes);
        if stripped.is_empty() || stripped == plain {
            return None;
        }
        self.by_alias
            .get_key_value(&stripped)
            .map(|(key, bucket)| (key.as_str(), bucket.as_slice()))
    }
}

/// Suffix comparison form: lowercase, dots removed.
pub fn normalize_suffix(s: &str) -> String {
    s.chars()
        .filter(|c| *c != '.')
        .collect::<String>()
        .to_lowercase()
}

/// Normalized alias key: lowercase, whitespace collapsed, trailing punctuation
/// removed, and a trailing legal-suffix token dropped.
pub fn normalize_alias(surface: &str, suffixes: &[String]) -> String {
    let lowered = surface.to_lowercase();
    let mut tokens: Vec<&str> = lowered.split_whitespace().collect();
    while let Some(last) = tokens.last() {
        let trimmed = last.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            tokens.pop();
            continue;
        }
        break;
    }
    if let Some(last) = tokens.last() {
        if suffixes.contains(&normalize_suffix(last)) {
            tokens.pop();
        }
    }
    tokens
        .join(" ")
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

/// Default legal suffixes recognized around company names.
pub fn default_legal_suffixes() -> Vec<String> {
    ["S.p.A.", "SpA", "S.r.l.", "Srl", "Inc.", "Ltd."]
        .iter()
        .map(|s| s.to_string())
        .collect()
}
