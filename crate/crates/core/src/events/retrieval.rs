//! Boolean retrieval and seeded sampling for building annotation pools.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;
use crate::text::tokenize;

/// Disjunction of conjunctive term groups (OR of ANDs); terms are lowercase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanQuery {
    pub groups: Vec<Vec<String>>,
}

impl BooleanQuery {
    /// Builds a query, lowercasing terms. At least one non-empty group is
    /// required.
    pub fn new(groups: Vec<Vec<String>>) -> Result<Self, String> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err("boolean query needs at least one non-empty group".to_string());
        }
        Ok(Self {
            groups: groups
                .into_iter()
                .map(|g| g.into_iter().map(|t| t.to_lowercase()).collect())
                .collect(),
        })
    }

    /// True when any group has all its terms in the token set.
    pub fn matches(&self, tokens: &HashSet<String>) -> bool {
        self.groups
            .iter()
            .any(|group| group.iter().all(|t| tokens.contains(t)))
    }
}

/// Exact boolean retrieval over (doc_id, text) pairs.
pub fn boolean_retrieve<'a>(
    query: &BooleanQuery,
    corpus: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> BTreeSet<String> {
    let mut hits = BTreeSet::new();
    for (doc_id, text) in corpus {
        let tokens: HashSet<String> = tokenize(text).into_iter().collect();
        if query.matches(&tokens) {
            hits.insert(doc_id.to_string());
        }
    }
    hits
}

/// Uniform sample without replacement: shuffle the sorted candidates with the
/// seed, take `n`, return sorted by doc id. `n >= len` returns everything.
pub fn sample_training_pool(matches: &BTreeSet<String>, n: usize, seed: u64) -> Vec<String> {
    let mut candidates: Vec<String> = matches.iter().cloned().collect();
    if n < candidates.len() {
        SplitMix64::new(seed).shuffle(&mut candidates);
        candidates.truncate(n);
        candidates.sort();
    }
    candidates
}
