//! Plain logistic regression (softmax for more than two classes) trained by
//! full-batch gradient descent on the raw, pre-encoding features. Gives the
//! quantum metrics a classical reference point.

use serde::{Deserialize, Serialize};

use crate::encoder::RawDataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 0.5,
            iterations: 500,
            l2: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogRegModel {
    /// One weight row per class over (features..., bias).
    pub weights: Vec<Vec<f64>>,
    /// Feature standardization fitted on the training set.
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
}

impl LogRegModel {
    fn standardized(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.feature_mean.iter().zip(&self.feature_std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn scores(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardized(x);
        self.weights
            .iter()
            .map(|w| {
                w[..z.len()]
                    .iter()
                    .zip(&z)
                    .map(|(wi, zi)| wi * zi)
                    .sum::<f64>()
                    + w[z.len()]
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> u32 {
        let scores = self.scores(x);
        let mut best = 0usize;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        best as u32
    }

    pub fn accuracy(&self, data: &RawDataset) -> f64 {
        let correct = data
            .features()
            .iter()
            .zip(data.labels())
            .filter(|(x, &y)| self.predict(x) == y)
            .count();
        correct as f64 / data.len() as f64
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

pub fn train_logreg(data: &RawDataset, config: &LogRegConfig) -> Result<LogRegModel> {
    if data.len() < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let n = data.len();
    let d = data.dim();
    let classes = data.num_classes() as usize;
    if classes < 2 {
        return Err(Error::invalid("need at least 2 classes"));
    }

    let mut mean = vec![0.0; d];
    for row in data.features() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let mut std = vec![0.0; d];
    for row in data.features() {
        for (s, (v, m)) in std.iter_mut().zip(row.iter().zip(&mean)) {
            *s += (v - m) * (v - m) / n as f64;
        }
    }
    for s in &mut std {
        *s = s.sqrt().max(1e-12);
    }

    let mut model = LogRegModel {
        weights: vec![vec![0.0; d + 1]; classes],
        feature_mean: mean,
        feature_std: std,
    };
    let standardized: Vec<Vec<f64>> = data
        .features()
        .iter()
        .map(|x| model.standardized(x))
        .collect();

    for _ in 0..config.iterations {
        let mut grad = vec![vec![0.0; d + 1]; classes];
        for (z, &y) in standardized.iter().zip(data.labels()) {
            let scores: Vec<f64> = model
                .weights
                .iter()
                .map(|w| {
                    w[..d].iter().zip(z).map(|(wi, zi)| wi * zi).sum::<f64>() + w[d]
                })
                .collect();
            let probs = softmax(&scores);
            for (c, grad_row) in grad.iter_mut().enumerate() {
                let err = probs[c] - if c as u32 == y { 1.0 } else { 0.0 };
                for (g, zi) in grad_row[..d].iter_mut().zip(z) {
                    *g += err * zi / n as f64;
                }
                grad_row[d] += err / n as f64;
            }
        }
        for (w_row, g_row) in model.weights.iter_mut().zip(&grad) {
            for (w, g) in w_row.iter_mut().zip(g_row) {
                *w -= config.learning_rate * (g + config.l2 * *w);
            }
        }
    }
    Ok(model)
}
