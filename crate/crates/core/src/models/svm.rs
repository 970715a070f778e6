//! One-vs-rest linear SVM trained by Pegasos-style subgradient descent.

use super::{softmax, ScoreVector, Standardizer};
use crate::error::{Error, Result};
use crate::ingest::EmotionLabel;
use crate::seqmap::{Functional, HolisticVector};
use crate::NUM_CLASSES;
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SVM training knobs. The step size follows the Pegasos schedule
/// `lr_t = 1 / (lambda * t)`, so only the L2 strength and epoch count matter.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmHyperparams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmHyperparams {
    fn default() -> Self {
        SvmHyperparams {
            lambda: 1e-3,
            epochs: 60,
            seed: 0,
        }
    }
}

/// Seven binary hinge-loss classifiers over standardized holistic vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    weights: Array2<f64>, // 7 x D
    biases: [f64; NUM_CLASSES],
    standardizer: Standardizer,
    functionals: Vec<Functional>,
    hyperparams: SvmHyperparams,
}

impl LinearSvmModel {
    /// Trains the 7 one-vs-rest problems with deterministic-seeded
    /// stochastic subgradient descent on standardized inputs.
    ///
    /// Returns the model and the end-of-epoch objective history (mean over
    /// classes of the regularized hinge objective).
    pub fn fit(
        train: &[(HolisticVector, EmotionLabel)],
        hp: &SvmHyperparams,
    ) -> Result<(LinearSvmModel, Vec<f64>)> {
        let Some((first, _)) = train.first() else {
            return Err(Error::InvalidTrainingSet {
                detail: "empty training set".to_string(),
            });
        };
        let dim = first.values.len();
        for (v, _) in train {
            if v.values.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("holistic vector of clip {:?}", v.clip_id),
                    expected: dim,
                    actual: v.values.len(),
                });
            }
        }
        let distinct = {
            let mut labels: Vec<EmotionLabel> = train.iter().map(|(_, l)| *l).collect();
            labels.sort();
            labels.dedup();
            labels.len()
        };
        if distinct < 2 {
            return Err(Error::InvalidTrainingSet {
                detail: "training set must contain at least two distinct labels".to_string(),
            });
        }
        let functionals = first
            .functional_names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<Vec<Functional>>>()?;

        let standardizer =
            Standardizer::fit(train.iter().map(|(v, _)| v.values.as_slice()), dim);
        let inputs: Vec<Array1<f64>> = train
            .iter()
            .map(|(v, _)| Array1::from(standardizer.apply(&v.values)))
            .collect();
        let targets: Vec<EmotionLabel> = train.iter().map(|(_, l)| *l).collect();

        let mut weights = Array2::zeros((NUM_CLASSES, dim));
        let mut biases = [0.0; NUM_CLASSES];
        let mut history = vec![0.0; hp.epochs];

        for class in 0..NUM_CLASSES {
            let mut rng = ChaCha8Rng::seed_from_u64(hp.seed.wrapping_add(class as u64));
            let signs: Vec<f64> = targets
                .iter()
                .map(|l| if l.index() == class { 1.0 } else { -1.0 })
                .collect();
            let mut w = Array1::<f64>::zeros(dim);
            let mut b = 0.0;
            let mut order: Vec<usize> = (0..inputs.len()).collect();
            let mut t = 0u64;
            for epoch in 0..hp.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (hp.lambda * t as f64);
                    let margin = signs[i] * (w.dot(&inputs[i]) + b);
                    w *= 1.0 - 1.0 / t as f64;
                    if margin < 1.0 {
                        w.scaled_add(eta * signs[i], &inputs[i]);
                        b += eta * signs[i];
                    }
                }
                history[epoch] += objective(&w, b, &inputs, &signs, hp.lambda);
            }
            weights.row_mut(class).assign(&w);
            biases[class] = b;
        }
        for h in &mut history {
            *h /= NUM_CLASSES as f64;
        }

        Ok((
            LinearSvmModel {
                weights,
                biases,
                standardizer,
                functionals,
                hyperparams: hp.clone(),
            },
            history,
        ))
    }

    /// Softmax over the 7 decision values computed on the standardized input.
    pub fn predict(&self, vec: &HolisticVector) -> Result<ScoreVector> {
        Ok(softmax(&self.decision_values(vec)?))
    }

    /// Raw per-class margins `w_c . z + b_c`.
    pub fn decision_values(&self, vec: &HolisticVector) -> Result<[f64; NUM_CLASSES]> {
        if vec.values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: format!("holistic vector of clip {:?}", vec.clip_id),
                expected: self.dim(),
                actual: vec.values.len(),
            });
        }
        let z = Array1::from(self.standardizer.apply(&vec.values));
        let mut out = [0.0; NUM_CLASSES];
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.weights.row(c).dot(&z) + self.biases[c];
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Functional bank the training vectors were built with.
    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    pub fn hyperparams(&self) -> &SvmHyperparams {
        &self.hyperparams
    }

    pub(crate) fn parts(
        &self,
    ) -> (
        &Array2<f64>,
        &[f64; NUM_CLASSES],
        &Standardizer,
        &[Functional],
    ) {
        (&self.weights, &self.biases, &self.standardizer, &self.functionals)
    }

    pub(crate) fn from_parts(
        weights: Array2<f64>,
        biases: [f64; NUM_CLASSES],
        standardizer: Standardizer,
        functionals: Vec<Functional>,
        hyperparams: SvmHyperparams,
    ) -> Self {
        LinearSvmModel {
            weights,
            biases,
            standardizer,
            functionals,
            hyperparams,
        }
    }
}

/// Regularized hinge objective of one binary problem.
fn objective(w: &Array1<f64>, b: f64, inputs: &[Array1<f64>], signs: &[f64], lambda: f64) -> f64 {
    let hinge: f64 = inputs
        .iter()
        .zip(signs)
        .map(|(x, &y)| (1.0 - y * (w.dot(x) + b)).max(0.0))
        .sum::<f64>()
        / inputs.len() as f64;
    0.5 * lambda * w.dot(w) + hinge
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use rand::Rng;

    /// Three analytically separable blobs (classes AN, HA, SU) of 100 points:
    /// centers 20 apart per axis, jitter bounded by 0.5, so the class margin
    /// is far above 1 after standardization.
    pub fn separable_blobs(seed: u64) -> Vec<(HolisticVector, EmotionLabel)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = [
            EmotionLabel::Anger,
            EmotionLabel::Happiness,
            EmotionLabel::Surprise,
        ];
        let dim = 6;
        let mut out = Vec::new();
        for k in 0..100 {
            let class = classes[k % 3];
            let center = (k % 3) * 2; // separated axis pairs
            let mut values = vec![0.0; dim];
            for (d, v) in values.iter_mut().enumerate() {
                *v = rng.gen_range(-0.5..0.5) + if d == center { 20.0 } else { 0.0 };
            }
            out.push((
                HolisticVector {
                    clip_id: format!("blob{k}"),
                    values,
                    functional_names: vec!["mean".into()],
                },
                class,
            ));
        }
        out
    }
}
