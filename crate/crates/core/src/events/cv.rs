//! Stratified k-fold cross-validation for per-category classifiers.
//!
//! Folds preserve the class ratio: each class is shuffled with the seed and
//! dealt round-robin. Per fold, the vocabulary is rebuilt from the training
//! portion only, so no information leaks from the held-out fold.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

use super::features::{featurize_tokens, Vocabulary};
use super::logreg::{train_logreg, TrainError, TrainParams};
use crate::text::tokenize;

/// One labeled document of a per-category dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDoc {
    pub doc_id: String,
    pub text: String,
    pub label: bool,
}

#[derive(Debug, Error)]
pub enum CvError {
    #[error("need at least {folds} positives and {folds} negatives, got {positives}/{negatives}")]
    InsufficientClassCounts {
        folds: usize,
        positives: usize,
        negatives: usize,
    },
    #[error("fold training failed: {0}")]
    Train(#[from] TrainError),
}

/// Confusion counts and derived metrics for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FoldMetrics {
    fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1,
        }
    }
}

/// Cross-validation report: per-fold and macro-averaged metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub category: String,
    pub seed: u64,
    pub folds: Vec<FoldMetrics>,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub avg_f1: f64,
}

/// Stratified fold assignment: per-class seeded shuffle, then round-robin.
/// Returns the fold index of each document.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed);
    let mut assignment = vec![0usize; labels.len()];
    for class in [true, false] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        rng.shuffle(&mut members);
        for (k, doc) in members.into_iter().enumerate() {
            assignment[doc] = k % folds;
        }
    }
    assignment
}

/// Runs stratified k-fold cross-validation, training with `params` and the
/// given stopwords, and reports per-fold plus macro-averaged P/R/F1.
pub fn cross_validate(
    category: &str,
    data: &[LabeledDoc],
    folds: usize,
    seed: u64,
    params: &TrainParams,
    stopwords: &HashSet<String>,
) -> Result<CvReport, CvError> {
    let positives = data.iter().filter(|d| d.label).count();
    let negatives = data.len() - positives;
    if positives < folds || negatives < folds {
        return Err(CvError::InsufficientClassCounts {
            folds,
            positives,
            negatives,
        });
    }

    let labels: Vec<bool> = data.iter().map(|d| d.label).collect();
    let assignment = stratified_folds(&labels, folds, seed);
    let tokenized: Vec<Vec<String>> = data.iter().map(|d| tokenize(&d.text)).collect();

    let mut fold_metrics = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..data.len()).filter(|i| assignment[*i] != fold).collect();
        let test_idx: Vec<usize> = (0..data.len()).filter(|i| assignment[*i] == fold).collect();

        let train_docs: Vec<Vec<String>> =
            train_idx.iter().map(|&i| tokenized[i].clone()).collect();
        let vocabulary = Vocabulary::build(&train_docs, stopwords);
        let train_set: Vec<_> = train_idx
            .iter()
            .map(|&i| (featurize_tokens(&tokenized[i], &vocabulary), data[i].label))
            .collect();
        let model = train_logreg(&train_set, vocabulary, params)?;

        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for &i in &test_idx {
            let fv = featurize_tokens(&tokenized[i], &model.vocabulary);
            let (_, predicted) = model.predict(&fv);
            match (predicted, data[i].label) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        fold_metrics.push(FoldMetrics::from_counts(tp, fp, fn_, tn));
    }

    let k = folds as f64;
    Ok(CvReport {
        category: category.to_string(),
        seed,
        avg_precision: fold_metrics.iter().map(|m| m.precision).sum::<f64>() / k,
        avg_recall: fold_metrics.iter().map(|m| m.recall).sum::<f64>() / k,
        avg_f1: fold_metrics.iter().map(|m| m.f1).sum::<f64>() / k,
        folds: fold_metrics,
    })
}

/// Parses a per-category labeled dataset (one JSON object per line).
pub fn load_labeled_docs(data: &str) -> Result<Vec<LabeledDoc>, String> {
    let mut docs = Vec::new();
    for (lineno, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: LabeledDoc = serde_json::from_str(line)
            .map_err(|e| format!("labeled doc line {}: {e}", lineno + 1))?;
        docs.push(doc);
    }
    Ok(docs)
}
