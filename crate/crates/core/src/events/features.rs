//! TF-IDF features over lowercase unigrams with stopword removal.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

/// Term-to-index mapping with per-term IDF, frozen at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Terms in index order (lexicographic, for determinism).
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds the vocabulary from tokenized documents. IDF is the smoothed
    /// form `ln((1+N)/(1+df)) + 1`, strictly positive.
    pub fn build(docs: &[Vec<String>], stopwords: &HashSet<String>) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let mut seen: HashSet<&str> = HashSet::new();
            for term in doc {
                if stopwords.contains(term.as_str()) {
                    continue;
                }
                if seen.insert(term) {
                    *df.entry(term).or_insert(0) += 1;
                }
            }
        }
        let n = docs.len() as f64;
        let mut terms = Vec::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (term, count) in df {
            terms.push(term.to_string());
            idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self { terms, idf, index }
    }

    /// Rebuilds the lookup map after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// L2-normalized sparse TF-IDF vector; indices are vocabulary positions,
/// strictly ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot_dense(&self, weights: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, w)| w * weights[i as usize])
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }
}

/// Featurizes text against a frozen vocabulary: tf·idf over in-vocabulary
/// terms, L2-normalized. An all-out-of-vocabulary document is a zero vector.
pub fn featurize(text: &str, vocabulary: &Vocabulary) -> FeatureVector {
    featurize_tokens(&tokenize(text), vocabulary)
}

pub fn featurize_tokens(tokens: &[String], vocabulary: &Vocabulary) -> FeatureVector {
    let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
    for token in tokens {
        if let Some(i) = vocabulary.index_of(token) {
            *tf.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(u32, f64)> = tf
        .into_iter()
        .map(|(i, count)| (i as u32, count * vocabulary.idf[i]))
        .collect();
    let norm: f64 = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in entries.iter_mut() {
            *w /= norm;
        }
    }
    FeatureVector { entries }
}

pub fn stopword_set(words: &[&str]) -> HashSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}
