//! Fβ scoring and confidence-threshold tuning.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fβ = (1+β²)·P·R / (β²·P + R); 0 when both P and R are 0. β=0.5 weights
/// precision twice as heavily as recall.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    debug_assert!(beta > 0.0);
    if precision == 0.0 && recall == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    (1.0 + b2) * precision * recall / (b2 * precision + recall)
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
}

/// The tuning result: the τ maximizing Fβ over the sweep, ties broken toward
/// the larger τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TuneError {
    #[error("empty annotation set")]
    Empty,
    #[error("no gold positives: recall is undefined")]
    NoGoldPositives,
}

/// Sweeps τ over the distinct confidence values plus {0, 1}; at each τ the
/// predicted-positive set is `confidence >= τ`. Precision of an empty
/// prediction set is defined as 1.0.
pub fn tune_threshold(scored: &[(f64, bool)], beta: f64) -> Result<ThresholdReport, TuneError> {
    if scored.is_empty() {
        return Err(TuneError::Empty);
    }
    let gold_positives = scored.iter().filter(|(_, gold)| *gold).count();
    if gold_positives == 0 {
        return Err(TuneError::NoGoldPositives);
    }

    let mut thresholds: Vec<f64> = scored.iter().map(|(c, _)| *c).collect();
    thresholds.push(0.0);
    thresholds.push(1.0);
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();

    let mut sweep = Vec::with_capacity(thresholds.len());
    let mut best: Option<SweepPoint> = None;
    for tau in thresholds {
        let point = evaluate_at(scored, gold_positives, tau, beta);
        let take = match &best {
            None => true,
            Some(b) => point.f_beta > b.f_beta || (point.f_beta == b.f_beta && tau > b.threshold),
        };
        if take {
            best = Some(point.clone());
        }
        sweep.push(point);
    }
    let best = best.unwrap();
    Ok(ThresholdReport {
        threshold: best.threshold,
        precision: best.precision,
        recall: best.recall,
        f_beta: best.f_beta,
        beta,
        sweep,
    })
}

fn evaluate_at(scored: &[(f64, bool)], gold_positives: usize, tau: f64, beta: f64) -> SweepPoint {
    let mut tp = 0usize;
    let mut fp = 0usize;
    for (confidence, gold) in scored {
        if *confidence >= tau {
            if *gold {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = tp as f64 / gold_positives as f64;
    SweepPoint {
        threshold: tau,
        precision,
        recall,
        f_beta: f_beta(precision, recall, beta),
    }
}
