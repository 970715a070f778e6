//! Desk-scale classifiers over the three audio representations:
//! a one-vs-rest linear SVM on holistic vectors and a single-layer LSTM on
//! either raw feature sequences or flattened map tiles.

mod lstm;
mod scoring;
mod store;
mod svm;

pub use lstm::{ForwardCache, LstmGradients, LstmHyperparams, LstmModel, ParamId};
pub use scoring::{flatten_tiles, score_clips, PipelineParams, Representation, TrainedModel};
pub use store::{load_model, save_model};
pub use svm::{LinearSvmModel, SvmHyperparams};

use crate::ingest::EmotionLabel;
use crate::NUM_CLASSES;
use serde::{Deserialize, Serialize};

/// Per-clip class scores in the fixed AN..SU order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    values: [f64; NUM_CLASSES],
}

impl ScoreVector {
    pub fn new(values: [f64; NUM_CLASSES]) -> Self {
        ScoreVector { values }
    }

    pub fn uniform() -> Self {
        ScoreVector {
            values: [1.0 / NUM_CLASSES as f64; NUM_CLASSES],
        }
    }

    pub fn values(&self) -> &[f64; NUM_CLASSES] {
        &self.values
    }

    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.values[label.index()]
    }

    /// Predicted class: argmax with ties broken toward the lowest index.
    pub fn argmax(&self) -> EmotionLabel {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        EmotionLabel::from_index(best).unwrap()
    }

    /// Maps the scores onto the probability simplex.
    ///
    /// Nonnegative vectors are divided by their sum (so probability-like
    /// inputs pass through unchanged); vectors with negative entries go
    /// through a softmax, which preserves the argmax; a constant vector
    /// becomes uniform.
    pub fn normalized(&self) -> ScoreVector {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            return ScoreVector::uniform();
        }
        if min >= 0.0 {
            let sum: f64 = self.values.iter().sum();
            let mut out = self.values;
            for v in &mut out {
                *v /= sum;
            }
            ScoreVector { values: out }
        } else {
            self.softmax()
        }
    }

    /// Numerically stable softmax.
    pub fn softmax(&self) -> ScoreVector {
        softmax(&self.values)
    }
}

pub(crate) fn softmax(values: &[f64; NUM_CLASSES]) -> ScoreVector {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; NUM_CLASSES];
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(values) {
        *o = (v - max).exp();
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    ScoreVector { values: out }
}

/// Per-dimension z-score transform fitted on training data.
///
/// Dimensions with zero variance get std 1 so the transform never divides
/// by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Fits mean and population std per dimension over `rows`.
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, dim: usize) -> Standardizer {
        let mut mean = vec![0.0; dim];
        let mut count = 0usize;
        for row in rows.clone() {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
            }
            count += 1;
        }
        let n = count.max(1) as f64;
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    /// Identity transform of the given dimension.
    pub fn identity(dim: usize) -> Standardizer {
        Standardizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }

    pub(crate) fn parts(&self) -> (&[f64], &[f64]) {
        (&self.mean, &self.std)
    }

    pub(crate) fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Standardizer {
        Standardizer { mean, std }
    }
}
