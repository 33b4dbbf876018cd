//! Word-embedding table and seed expansion for query bootstrapping.
//!
//! Vectors come from a word2vec text-format file; expansion lists the nearest
//! words to each seed by cosine similarity, as candidates for the human query
//! selection step.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("embeddings line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("embedding table is empty")]
    EmptyTable,
}

/// Word vectors of a fixed dimension; words are lowercased at load and
/// lookups are exact after that.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub dimension: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    /// Loads word2vec text format: header "count dimension", then one
    /// "word v1 ... vd" per line.
    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let data = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&data)
    }

    pub fn from_text(data: &str) -> Result<Self, EmbeddingError> {
        let mut lines = data.lines().enumerate();
        let (_, header) = lines.next().ok_or(EmbeddingError::EmptyTable)?;
        let mut parts = header.split_whitespace();
        let _count: usize =
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(EmbeddingError::Parse {
                    line: 1,
                    message: "header must be \"count dimension\"".to_string(),
                })?;
        let dimension: usize =
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(EmbeddingError::Parse {
                    line: 1,
                    message: "header must be \"count dimension\"".to_string(),
                })?;

        let mut words = Vec::new();
        let mut vectors = Vec::new();
        let mut index = HashMap::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields
                .next()
                .ok_or(EmbeddingError::Parse {
                    line: lineno + 1,
                    message: "missing word".to_string(),
                })?
                .to_lowercase();
            let vector: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|e| EmbeddingError::Parse {
                        line: lineno + 1,
                        message: format!("bad component {f:?}: {e}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if vector.len() != dimension {
                return Err(EmbeddingError::Parse {
                    line: lineno + 1,
                    message: format!("expected {dimension} components, got {}", vector.len()),
                });
            }
            if index.contains_key(&word) {
                continue; // first occurrence wins
            }
            index.insert(word.clone(), words.len());
            words.push(word);
            vectors.push(vector);
        }
        if words.is_empty() {
            return Err(EmbeddingError::EmptyTable);
        }
        Ok(Self {
            dimension,
            words,
            vectors,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vectors[i].as_slice())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Nearest neighbors of one seed word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedExpansion {
    pub seed: String,
    /// (word, cosine), similarity descending, ties lexicographic.
    pub neighbors: Vec<(String, f64)>,
}

/// Result of expanding a seed list: per-seed neighbor candidates plus the
/// seeds missing from the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub expansions: Vec<SeedExpansion>,
    pub missing: Vec<String>,
}

/// For each seed present in the table, the `top_k` most similar other words
/// by cosine. Missing seeds are reported and skipped; an empty table is an
/// error.
pub fn expand_seeds(
    seeds: &[String],
    table: &EmbeddingTable,
    top_k: usize,
) -> Result<ExpansionReport, EmbeddingError> {
    if table.is_empty() {
        return Err(EmbeddingError::EmptyTable);
    }
    let mut expansions = Vec::new();
    let mut missing = Vec::new();
    for seed in seeds {
        let seed_lc = seed.to_lowercase();
        let Some(seed_vec) = table.get(&seed_lc) else {
            missing.push(seed.clone());
            continue;
        };
        let mut scored: Vec<(String, f64)> = table
            .words
            .iter()
            .zip(table.vectors.iter())
            .filter(|(w, _)| **w != seed_lc)
            .map(|(w, v)| (w.clone(), cosine(seed_vec, v)))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(top_k);
        expansions.push(SeedExpansion {
            seed: seed.clone(),
            neighbors: scored,
        });
    }
    Ok(ExpansionReport {
        expansions,
        missing,
    })
}
