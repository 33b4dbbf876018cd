//! Binary logistic regression trained by deterministic full-batch gradient
//! descent on mean log-loss plus an L2 penalty on the weights (bias
//! unregularized). Identical inputs and seed give a bit-identical model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

use super::features::{FeatureVector, Vocabulary};

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training data is empty")]
    Empty,
    #[error("training data contains a single class ({0})")]
    SingleClass(&'static str),
    #[error("feature index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: u32, dim: usize },
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            epochs: 200,
            learning_rate: 0.5,
            seed: 0,
        }
    }
}

/// A trained per-category classifier: dense weights over the vocabulary plus
/// bias and decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
    pub decision_threshold: f64,
    pub vocabulary: Vocabulary,
}

impl LogRegModel {
    /// Probability and thresholded label for a vector indexed against this
    /// model's vocabulary.
    pub fn predict(&self, features: &FeatureVector) -> (f64, bool) {
        let margin = features.dot_dense(&self.weights) + self.bias;
        let probability = sigmoid(margin);
        (probability, probability >= self.decision_threshold)
    }

    pub fn predict_text(&self, text: &str) -> (f64, bool) {
        self.predict(&super::features::featurize(text, &self.vocabulary))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable log(1 + exp(z)).
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus (l2/2)·‖w‖² for the given parameters.
pub fn objective(data: &[(FeatureVector, bool)], weights: &[f64], bias: f64, l2: f64) -> f64 {
    let n = data.len() as f64;
    let mut loss = 0.0;
    for (fv, label) in data {
        let z = fv.dot_dense(weights) + bias;
        let y = if *label { 1.0 } else { 0.0 };
        loss += log1p_exp(z) - y * z;
    }
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    loss / n + reg
}

/// Analytic gradient of [`objective`]. Returns (grad_weights, grad_bias).
pub fn gradient(
    data: &[(FeatureVector, bool)],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (fv, label) in data {
        let z = fv.dot_dense(weights) + bias;
        let residual = sigmoid(z) - if *label { 1.0 } else { 0.0 };
        for &(i, x) in &fv.entries {
            grad_w[i as usize] += residual * x;
        }
        grad_b += residual;
    }
    for (g, w) in grad_w.iter_mut().zip(weights.iter()) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

/// Trains on (vector, label) pairs with full-batch gradient descent for a
/// fixed number of epochs. Requires both classes present.
pub fn train_logreg(
    data: &[(FeatureVector, bool)],
    vocabulary: Vocabulary,
    params: &TrainParams,
) -> Result<LogRegModel, TrainError> {
    if data.is_empty() {
        return Err(TrainError::Empty);
    }
    if data.iter().all(|(_, y)| *y) {
        return Err(TrainError::SingleClass("all positive"));
    }
    if data.iter().all(|(_, y)| !*y) {
        return Err(TrainError::SingleClass("all negative"));
    }
    let dim = vocabulary.len();
    for (fv, _) in data {
        if let Some(&(i, _)) = fv.entries.iter().find(|&&(i, _)| i as usize >= dim) {
            return Err(TrainError::IndexOutOfRange { index: i, dim });
        }
    }

    // Tiny seeded init keeps runs bit-identical while letting different
    // seeds start from different points.
    let mut rng = SplitMix64::new(params.seed);
    let mut weights: Vec<f64> = (0..dim).map(|_| (rng.next_f64() - 0.5) * 0.02).collect();
    let mut bias = 0.0;

    for _ in 0..params.epochs {
        let (grad_w, grad_b) = gradient(data, &weights, bias, params.l2);
        for (w, g) in weights.iter_mut().zip(grad_w.iter()) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * grad_b;
    }

    Ok(LogRegModel {
        weights,
        bias,
        l2: params.l2,
        decision_threshold: 0.5,
        vocabulary,
    })
}
