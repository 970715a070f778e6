//! Single-layer LSTM with final-state readout, trained by full
//! backpropagation through time.
//!
//! Standard recurrence over the concatenated input `z_t = [x_t; h_{t-1}]`
//! with zero initial state:
//!
//! ```text
//! i_t = sigmoid(Wi z_t + bi)        f_t = sigmoid(Wf z_t + bf)
//! o_t = sigmoid(Wo z_t + bo)        g_t = tanh(Wg z_t + bg)
//! c_t = f_t * c_{t-1} + i_t * g_t   h_t = o_t * tanh(c_t)
//! ```
//!
//! The readout maps the final hidden state to 7 logits; scores are their
//! softmax; training minimizes cross-entropy.

use super::{softmax, ScoreVector, Standardizer};
use crate::error::{Error, Result};
use crate::ingest::EmotionLabel;
use crate::NUM_CLASSES;
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// LSTM training knobs.
///
/// `batch_size` sequences are averaged per update; `lr_decay_every` /
/// `lr_decay_factor` implement a step schedule (0 disables it) and
/// `max_steps` caps the total number of updates (0 means none).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmHyperparams {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub clip_norm: f64,
    pub seed: u64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
    pub max_steps: usize,
}

impl LstmHyperparams {
    /// Defaults for the raw feature-sequence classifier (512 hidden units).
    pub fn seq_defaults() -> Self {
        LstmHyperparams {
            hidden_dim: 512,
            learning_rate: 0.01,
            epochs: 30,
            clip_norm: 5.0,
            seed: 0,
            weight_decay: 0.0,
            batch_size: 1,
            lr_decay_every: 0,
            lr_decay_factor: 1.0,
            max_steps: 0,
        }
    }

    /// Defaults for the map-sequence classifier: 128 hidden units, initial
    /// learning rate 0.001 decayed by 10 every 3000 steps, batches of 16,
    /// weight decay 0.002 and at most 10000 update steps.
    pub fn map_defaults() -> Self {
        LstmHyperparams {
            hidden_dim: 128,
            learning_rate: 0.001,
            epochs: 50,
            clip_norm: 5.0,
            seed: 0,
            weight_decay: 0.002,
            batch_size: 16,
            lr_decay_every: 3000,
            lr_decay_factor: 10.0,
            max_steps: 10_000,
        }
    }
}

impl Default for LstmHyperparams {
    fn default() -> Self {
        Self::seq_defaults()
    }
}

/// The four gate parameter tensors plus readout, identified for gradient
/// checking and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamId {
    WInput,
    WForget,
    WOutput,
    WCell,
    BInput,
    BForget,
    BOutput,
    BCell,
    WReadout,
    BReadout,
}

impl ParamId {
    pub const ALL: [ParamId; 10] = [
        ParamId::WInput,
        ParamId::WForget,
        ParamId::WOutput,
        ParamId::WCell,
        ParamId::BInput,
        ParamId::BForget,
        ParamId::BOutput,
        ParamId::BCell,
        ParamId::WReadout,
        ParamId::BReadout,
    ];
}

/// Parameter collection shared by the model and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_input: Array2<f64>,
    pub w_forget: Array2<f64>,
    pub w_output: Array2<f64>,
    pub w_cell: Array2<f64>,
    pub b_input: Array1<f64>,
    pub b_forget: Array1<f64>,
    pub b_output: Array1<f64>,
    pub b_cell: Array1<f64>,
    pub w_readout: Array2<f64>,
    pub b_readout: Array1<f64>,
}

impl LstmParams {
    fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let z = input_dim + hidden_dim;
        LstmParams {
            w_input: Array2::zeros((hidden_dim, z)),
            w_forget: Array2::zeros((hidden_dim, z)),
            w_output: Array2::zeros((hidden_dim, z)),
            w_cell: Array2::zeros((hidden_dim, z)),
            b_input: Array1::zeros(hidden_dim),
            b_forget: Array1::zeros(hidden_dim),
            b_output: Array1::zeros(hidden_dim),
            b_cell: Array1::zeros(hidden_dim),
            w_readout: Array2::zeros((NUM_CLASSES, hidden_dim)),
            b_readout: Array1::zeros(NUM_CLASSES),
        }
    }

    fn tensor(&self, id: ParamId) -> TensorRef<'_> {
        match id {
            ParamId::WInput => TensorRef::Matrix(&self.w_input),
            ParamId::WForget => TensorRef::Matrix(&self.w_forget),
            ParamId::WOutput => TensorRef::Matrix(&self.w_output),
            ParamId::WCell => TensorRef::Matrix(&self.w_cell),
            ParamId::BInput => TensorRef::Vector(&self.b_input),
            ParamId::BForget => TensorRef::Vector(&self.b_forget),
            ParamId::BOutput => TensorRef::Vector(&self.b_output),
            ParamId::BCell => TensorRef::Vector(&self.b_cell),
            ParamId::WReadout => TensorRef::Matrix(&self.w_readout),
            ParamId::BReadout => TensorRef::Vector(&self.b_readout),
        }
    }

    fn tensor_mut(&mut self, id: ParamId) -> TensorMut<'_> {
        match id {
            ParamId::WInput => TensorMut::Matrix(&mut self.w_input),
            ParamId::WForget => TensorMut::Matrix(&mut self.w_forget),
            ParamId::WOutput => TensorMut::Matrix(&mut self.w_output),
            ParamId::WCell => TensorMut::Matrix(&mut self.w_cell),
            ParamId::BInput => TensorMut::Vector(&mut self.b_input),
            ParamId::BForget => TensorMut::Vector(&mut self.b_forget),
            ParamId::BOutput => TensorMut::Vector(&mut self.b_output),
            ParamId::BCell => TensorMut::Vector(&mut self.b_cell),
            ParamId::WReadout => TensorMut::Matrix(&mut self.w_readout),
            ParamId::BReadout => TensorMut::Vector(&mut self.b_readout),
        }
    }

    /// Element count of one tensor.
    pub fn len(&self, id: ParamId) -> usize {
        match self.tensor(id) {
            TensorRef::Matrix(m) => m.len(),
            TensorRef::Vector(v) => v.len(),
        }
    }

    /// Reads one element by row-major flat index.
    pub fn get(&self, id: ParamId, flat: usize) -> f64 {
        match self.tensor(id) {
            TensorRef::Matrix(m) => m.as_slice().unwrap()[flat],
            TensorRef::Vector(v) => v[flat],
        }
    }

    /// Writes one element by row-major flat index.
    pub fn set(&mut self, id: ParamId, flat: usize, value: f64) {
        match self.tensor_mut(id) {
            TensorMut::Matrix(m) => m.as_slice_mut().unwrap()[flat] = value,
            TensorMut::Vector(v) => v[flat] = value,
        }
    }

    fn is_finite(&self) -> bool {
        ParamId::ALL.iter().all(|&id| match self.tensor(id) {
            TensorRef::Matrix(m) => m.iter().all(|v| v.is_finite()),
            TensorRef::Vector(v) => v.iter().all(|v| v.is_finite()),
        })
    }

    fn squared_norm(&self) -> f64 {
        ParamId::ALL
            .iter()
            .map(|&id| match self.tensor(id) {
                TensorRef::Matrix(m) => m.iter().map(|v| v * v).sum::<f64>(),
                TensorRef::Vector(v) => v.iter().map(|v| v * v).sum::<f64>(),
            })
            .sum()
    }

    fn scale(&mut self, factor: f64) {
        for id in ParamId::ALL {
            match self.tensor_mut(id) {
                TensorMut::Matrix(m) => *m *= factor,
                TensorMut::Vector(v) => *v *= factor,
            }
        }
    }

    fn add_scaled(&mut self, other: &LstmParams, factor: f64) {
        self.w_input.scaled_add(factor, &other.w_input);
        self.w_forget.scaled_add(factor, &other.w_forget);
        self.w_output.scaled_add(factor, &other.w_output);
        self.w_cell.scaled_add(factor, &other.w_cell);
        self.b_input.scaled_add(factor, &other.b_input);
        self.b_forget.scaled_add(factor, &other.b_forget);
        self.b_output.scaled_add(factor, &other.b_output);
        self.b_cell.scaled_add(factor, &other.b_cell);
        self.w_readout.scaled_add(factor, &other.w_readout);
        self.b_readout.scaled_add(factor, &other.b_readout);
    }
}

enum TensorRef<'a> {
    Matrix(&'a Array2<f64>),
    Vector(&'a Array1<f64>),
}

enum TensorMut<'a> {
    Matrix(&'a mut Array2<f64>),
    Vector(&'a mut Array1<f64>),
}

/// Gradients take the same shape as the parameters.
pub type LstmGradients = LstmParams;

/// Per-step activations kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    /// Concatenated `[standardized input; previous hidden]`.
    pub z: Array1<f64>,
    pub gate_input: Array1<f64>,
    pub gate_forget: Array1<f64>,
    pub gate_output: Array1<f64>,
    pub candidate: Array1<f64>,
    pub cell: Array1<f64>,
    pub cell_prev: Array1<f64>,
    pub hidden: Array1<f64>,
}

/// Activations of a whole forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub steps: Vec<StepCache>,
    pub logits: Array1<f64>,
    pub scores: ScoreVector,
}

/// Single-layer LSTM classifier with input standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    input_dim: usize,
    hidden_dim: usize,
    params: LstmParams,
    standardizer: Standardizer,
    hyperparams: LstmHyperparams,
}

impl LstmModel {
    /// Seeded uniform Xavier-style init; forget-gate bias starts at 1 so
    /// early training does not wipe the cell state.
    pub fn new_random(input_dim: usize, hp: &LstmHyperparams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        let hidden = hp.hidden_dim;
        let mut params = LstmParams::zeros(input_dim, hidden);
        let z = input_dim + hidden;
        let gate_scale = (6.0 / (z + hidden) as f64).sqrt();
        for w in [
            &mut params.w_input,
            &mut params.w_forget,
            &mut params.w_output,
            &mut params.w_cell,
        ] {
            for v in w.iter_mut() {
                *v = rng.gen_range(-gate_scale..gate_scale);
            }
        }
        let out_scale = (6.0 / (hidden + NUM_CLASSES) as f64).sqrt();
        for v in params.w_readout.iter_mut() {
            *v = rng.gen_range(-out_scale..out_scale);
        }
        params.b_forget.fill(1.0);
        LstmModel {
            input_dim,
            hidden_dim: hidden,
            params,
            standardizer: Standardizer::identity(input_dim),
            hyperparams: hp.clone(),
        }
    }

    /// All-zero parameters (uniform output by construction).
    pub fn new_zeroed(input_dim: usize, hp: &LstmHyperparams) -> Self {
        LstmModel {
            input_dim,
            hidden_dim: hp.hidden_dim,
            params: LstmParams::zeros(input_dim, hp.hidden_dim),
            standardizer: Standardizer::identity(input_dim),
            hyperparams: hp.clone(),
        }
    }

    /// Trains on labeled sequences by full BPTT with global-norm gradient
    /// clipping. Deterministic given the seed. Returns the model and the
    /// per-epoch mean cross-entropy history.
    pub fn fit(
        train: &[(Vec<Vec<f64>>, EmotionLabel)],
        input_dim: usize,
        hp: &LstmHyperparams,
    ) -> Result<(LstmModel, Vec<f64>)> {
        if train.is_empty() {
            return Err(Error::InvalidTrainingSet {
                detail: "empty training set".to_string(),
            });
        }
        for (seq, _) in train {
            if seq.is_empty() {
                return Err(Error::InvalidTrainingSet {
                    detail: "zero-length sequence in training set".to_string(),
                });
            }
            for step in seq {
                if step.len() != input_dim {
                    return Err(Error::DimensionMismatch {
                        context: "training sequence step".to_string(),
                        expected: input_dim,
                        actual: step.len(),
                    });
                }
            }
        }

        let mut model = Self::new_random(input_dim, hp);
        model.standardizer = Standardizer::fit(
            train.iter().flat_map(|(seq, _)| seq.iter().map(|s| s.as_slice())),
            input_dim,
        );

        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
        let mut order: Vec<usize> = (0..train.len()).collect();
        let batch = hp.batch_size.max(1);
        let mut step_count = 0usize;
        let mut history = Vec::with_capacity(hp.epochs);

        'training: for epoch in 0..hp.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut epoch_examples = 0usize;
            for chunk in order.chunks(batch) {
                let mut grads = LstmParams::zeros(input_dim, model.hidden_dim);
                let mut batch_loss = 0.0;
                for &i in chunk {
                    let (seq, label) = &train[i];
                    let (loss, g) = model.loss_and_gradients(seq, *label)?;
                    batch_loss += loss;
                    grads.add_scaled(&g, 1.0 / chunk.len() as f64);
                }
                epoch_loss += batch_loss;
                epoch_examples += chunk.len();
                if !batch_loss.is_finite() {
                    return Err(Error::Divergence { epoch });
                }

                // global-norm clipping over every tensor
                let norm = grads.squared_norm().sqrt();
                if hp.clip_norm > 0.0 && norm > hp.clip_norm {
                    grads.scale(hp.clip_norm / norm);
                }

                let lr = hp.learning_rate * current_decay(hp, step_count);
                if hp.weight_decay > 0.0 {
                    model.params.scale(1.0 - lr * hp.weight_decay);
                }
                model.params.add_scaled(&grads, -lr);
                if !model.params.is_finite() {
                    return Err(Error::Divergence { epoch });
                }

                step_count += 1;
                if hp.max_steps > 0 && step_count >= hp.max_steps {
                    history.push(epoch_loss / epoch_examples as f64);
                    break 'training;
                }
            }
            history.push(epoch_loss / epoch_examples as f64);
        }

        Ok((model, history))
    }

    /// Runs the recurrence and returns the class scores with the full
    /// activation cache.
    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<(ScoreVector, ForwardCache)> {
        if inputs.is_empty() {
            return Err(Error::Precondition(
                "LSTM forward needs at least one step".to_string(),
            ));
        }
        let mut steps = Vec::with_capacity(inputs.len());
        let mut hidden = Array1::zeros(self.hidden_dim);
        let mut cell = Array1::<f64>::zeros(self.hidden_dim);
        for x in inputs {
            if x.len() != self.input_dim {
                return Err(Error::DimensionMismatch {
                    context: "LSTM input step".to_string(),
                    expected: self.input_dim,
                    actual: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "LSTM input step".to_string(),
                });
            }
            let std_x = self.standardizer.apply(x);
            let mut z = Array1::zeros(self.input_dim + self.hidden_dim);
            z.slice_mut(ndarray::s![..self.input_dim])
                .assign(&Array1::from(std_x));
            z.slice_mut(ndarray::s![self.input_dim..]).assign(&hidden);

            let p = &self.params;
            let gate_input = (p.w_input.dot(&z) + &p.b_input).mapv(sigmoid);
            let gate_forget = (p.w_forget.dot(&z) + &p.b_forget).mapv(sigmoid);
            let gate_output = (p.w_output.dot(&z) + &p.b_output).mapv(sigmoid);
            let candidate = (p.w_cell.dot(&z) + &p.b_cell).mapv(f64::tanh);

            let cell_prev = cell.clone();
            cell = &gate_forget * &cell_prev + &gate_input * &candidate;
            hidden = &gate_output * &cell.mapv(f64::tanh);

            steps.push(StepCache {
                z,
                gate_input,
                gate_forget,
                gate_output,
                candidate,
                cell: cell.clone(),
                cell_prev,
                hidden: hidden.clone(),
            });
        }

        let logits = self.params.w_readout.dot(&hidden) + &self.params.b_readout;
        let mut logit_arr = [0.0; NUM_CLASSES];
        logit_arr.copy_from_slice(logits.as_slice().unwrap());
        let scores = softmax(&logit_arr);
        Ok((
            scores,
            ForwardCache {
                steps,
                logits,
                scores,
            },
        ))
    }

    /// Cross-entropy loss of one labeled sequence.
    pub fn loss(&self, inputs: &[Vec<f64>], label: EmotionLabel) -> Result<f64> {
        let (scores, _) = self.forward(inputs)?;
        Ok(-scores.values()[label.index()].max(1e-300).ln())
    }

    /// Loss together with the analytic BPTT gradients of every tensor.
    pub fn loss_and_gradients(
        &self,
        inputs: &[Vec<f64>],
        label: EmotionLabel,
    ) -> Result<(f64, LstmGradients)> {
        let (scores, cache) = self.forward(inputs)?;
        let loss = -scores.values()[label.index()].max(1e-300).ln();

        let mut grads = LstmParams::zeros(self.input_dim, self.hidden_dim);
        // d loss / d logits = p - onehot(y)
        let mut dlogits = Array1::from(scores.values().to_vec());
        dlogits[label.index()] -= 1.0;

        let final_hidden = &cache.steps.last().unwrap().hidden;
        grads.w_readout = outer(&dlogits, final_hidden);
        grads.b_readout = dlogits.clone();

        let mut dh = self.params.w_readout.t().dot(&dlogits);
        let mut dc_carry = Array1::<f64>::zeros(self.hidden_dim);

        for step in cache.steps.iter().rev() {
            let tanh_c = step.cell.mapv(f64::tanh);
            let dc = &dh * &step.gate_output * tanh_c.mapv(|t| 1.0 - t * t) + &dc_carry;

            let do_pre = &dh
                * &tanh_c
                * &step.gate_output
                * &step.gate_output.mapv(|o| 1.0 - o);
            let di_pre = &dc
                * &step.candidate
                * &step.gate_input
                * &step.gate_input.mapv(|i| 1.0 - i);
            let df_pre = &dc
                * &step.cell_prev
                * &step.gate_forget
                * &step.gate_forget.mapv(|f| 1.0 - f);
            let dg_pre = &dc * &step.gate_input * &step.candidate.mapv(|g| 1.0 - g * g);

            grads.w_input += &outer(&di_pre, &step.z);
            grads.w_forget += &outer(&df_pre, &step.z);
            grads.w_output += &outer(&do_pre, &step.z);
            grads.w_cell += &outer(&dg_pre, &step.z);
            grads.b_input += &di_pre;
            grads.b_forget += &df_pre;
            grads.b_output += &do_pre;
            grads.b_cell += &dg_pre;

            let p = &self.params;
            let dz = p.w_input.t().dot(&di_pre)
                + p.w_forget.t().dot(&df_pre)
                + p.w_output.t().dot(&do_pre)
                + p.w_cell.t().dot(&dg_pre);
            dh = dz.slice(ndarray::s![self.input_dim..]).to_owned();
            dc_carry = &dc * &step.gate_forget;
        }

        Ok((loss, grads))
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn params(&self) -> &LstmParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut LstmParams {
        &mut self.params
    }

    pub fn hyperparams(&self) -> &LstmHyperparams {
        &self.hyperparams
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn set_standardizer(&mut self, s: Standardizer) {
        assert_eq!(s.dim(), self.input_dim);
        self.standardizer = s;
    }

    pub(crate) fn from_parts(
        input_dim: usize,
        hidden_dim: usize,
        params: LstmParams,
        standardizer: Standardizer,
        hyperparams: LstmHyperparams,
    ) -> Self {
        LstmModel {
            input_dim,
            hidden_dim,
            params,
            standardizer,
            hyperparams,
        }
    }
}

fn current_decay(hp: &LstmHyperparams, step: usize) -> f64 {
    if hp.lr_decay_every == 0 || hp.lr_decay_factor <= 1.0 {
        1.0
    } else {
        1.0 / hp.lr_decay_factor.powi((step / hp.lr_decay_every) as i32)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.len(), b.len()));
    for (i, &av) in a.iter().enumerate() {
        for (j, &bv) in b.iter().enumerate() {
            out[[i, j]] = av * bv;
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// 3-class sequence task: class k's dimension carries a 0→1 ramp while
    /// the other dimensions hold small seeded noise.
    pub fn ramp_sequences(
        per_class: usize,
        len: usize,
        seed: u64,
    ) -> Vec<(Vec<Vec<f64>>, EmotionLabel)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = [
            EmotionLabel::Anger,
            EmotionLabel::Disgust,
            EmotionLabel::Fear,
        ];
        let mut out = Vec::new();
        for k in 0..3 {
            for _ in 0..per_class {
                let seq: Vec<Vec<f64>> = (0..len)
                    .map(|t| {
                        (0..3)
                            .map(|d| {
                                let noise = rng.gen_range(-0.05..0.05);
                                if d == k {
                                    t as f64 / (len - 1) as f64 + noise
                                } else {
                                    noise
                                }
                            })
                            .collect()
                    })
                    .collect();
                out.push((seq, classes[k]));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::ramp_sequences;
    use super::*;

    fn tiny_hp(hidden: usize, seed: u64) -> LstmHyperparams {
        LstmHyperparams {
            hidden_dim: hidden,
            learning_rate: 0.05,
            epochs: 10,
            clip_norm: 5.0,
            seed,
            weight_decay: 0.0,
            batch_size: 1,
            lr_decay_every: 0,
            lr_decay_factor: 1.0,
            max_steps: 0,
        }
    }

    fn random_sequence(len: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn zero_parameters_give_uniform_scores() {
        let model = LstmModel::new_zeroed(3, &tiny_hp(4, 0));
        let (scores, cache) = model.forward(&random_sequence(5, 3, 1)).unwrap();
        assert_eq!(scores, ScoreVector::uniform());
        for step in &cache.steps {
            assert!(step.hidden.iter().all(|&h| h == 0.0));
        }
    }

    // independent step-by-step recurrence with scalar loops
    fn oracle_forward(model: &LstmModel, inputs: &[Vec<f64>]) -> Vec<f64> {
        let p = model.params();
        let hidden_dim = model.hidden_dim();
        let input_dim = model.input_dim();
        let mut h = vec![0.0; hidden_dim];
        let mut c = vec![0.0; hidden_dim];
        for x in inputs {
            let sx = model.standardizer().apply(x);
            let z: Vec<f64> = sx.iter().copied().chain(h.iter().copied()).collect();
            let mut nh = vec![0.0; hidden_dim];
            let mut nc = vec![0.0; hidden_dim];
            for r in 0..hidden_dim {
                let dot = |w: &Array2<f64>| -> f64 {
                    (0..input_dim + hidden_dim).map(|j| w[[r, j]] * z[j]).sum()
                };
                let i = 1.0 / (1.0 + (-(dot(&p.w_input) + p.b_input[r])).exp());
                let f = 1.0 / (1.0 + (-(dot(&p.w_forget) + p.b_forget[r])).exp());
                let o = 1.0 / (1.0 + (-(dot(&p.w_output) + p.b_output[r])).exp());
                let g = (dot(&p.w_cell) + p.b_cell[r]).tanh();
                nc[r] = f * c[r] + i * g;
                nh[r] = o * nc[r].tanh();
            }
            h = nh;
            c = nc;
        }
        let logits: Vec<f64> = (0..NUM_CLASSES)
            .map(|k| {
                (0..hidden_dim)
                    .map(|j| p.w_readout[[k, j]] * h[j])
                    .sum::<f64>()
                    + p.b_readout[k]
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        exps.iter().map(|e| e / sum).collect()
    }

    #[test]
    fn forward_matches_independent_recurrence_oracle() {
        let model = LstmModel::new_random(3, &tiny_hp(4, 99));
        let inputs = random_sequence(5, 3, 2);
        let (scores, _) = model.forward(&inputs).unwrap();
        let expected = oracle_forward(&model, &inputs);
        for (a, b) in scores.values().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn saturated_gates_make_the_second_step_a_no_op() {
        // Step 1 writes a nonzero cell (input gate open via bias); once the
        // hidden state is nonzero it drives the input gate shut through
        // large negative recurrent weights, while the saturated forget gate
        // keeps the cell. The repeated vector then changes nothing.
        let hp = tiny_hp(4, 7);
        let mut model = LstmModel::new_zeroed(2, &hp);
        const BIG: f64 = 60.0; // saturates the sigmoid within f64 precision
        let input_dim = 2;
        {
            let p = model.params_mut();
            p.b_forget.fill(BIG); // forget ≈ 1: keep the cell
            p.b_output.fill(BIG); // output ≈ 1: h = tanh(c)
            p.b_input.fill(BIG); // open at step 1 (h = 0)
            for r in 0..4 {
                for j in input_dim..input_dim + 4 {
                    p.w_input[[r, j]] = -10.0 * BIG; // any h > 0 closes it
                }
                p.w_cell[[r, 0]] = 1.0; // candidate driven by the input
                p.w_cell[[r, 1]] = 1.0;
            }
        }

        let x = vec![2.0, 2.0];
        let (_, once) = model.forward(std::slice::from_ref(&x)).unwrap();
        let (_, twice) = model.forward(&[x.clone(), x]).unwrap();
        let c1 = &once.steps[0].cell;
        let h1 = &once.steps[0].hidden;
        assert!(c1.iter().all(|&c| c > 0.9), "step 1 must write: {c1:?}");
        let c2 = &twice.steps[1].cell;
        let h2 = &twice.steps[1].hidden;
        for (a, b) in c1.iter().zip(c2) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in h1.iter().zip(h2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn appending_a_step_never_mutates_earlier_cache_entries() {
        let model = LstmModel::new_random(3, &tiny_hp(4, 5));
        let mut inputs = random_sequence(6, 3, 3);
        let (_, full) = model.forward(&inputs).unwrap();
        inputs.pop();
        let (_, prefix) = model.forward(&inputs).unwrap();
        assert_eq!(prefix.steps.len() + 1, full.steps.len());
        for (a, b) in prefix.steps.iter().zip(&full.steps) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let model = LstmModel::new_random(3, &tiny_hp(4, 12345));
        let inputs = random_sequence(5, 3, 77);
        let label = EmotionLabel::Fear;
        let (_, analytic) = model.loss_and_gradients(&inputs, label).unwrap();

        let step = 1e-5;
        let mut max_rel = 0.0f64;
        for id in ParamId::ALL {
            for flat in 0..model.params().len(id) {
                let mut m = model.clone();
                let orig = m.params().get(id, flat);
                m.params_mut().set(id, flat, orig + step);
                let up = m.loss(&inputs, label).unwrap();
                m.params_mut().set(id, flat, orig - step);
                let down = m.loss(&inputs, label).unwrap();
                let numeric = (up - down) / (2.0 * step);
                let a = analytic.get(id, flat);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-5);
                max_rel = max_rel.max(rel);
            }
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn ramp_fixture_reaches_full_training_accuracy() {
        let train = ramp_sequences(20, 12, 4);
        let mut hp = tiny_hp(16, 0);
        hp.epochs = 200;
        let (model, history) = LstmModel::fit(&train, 3, &hp).unwrap();
        let correct = train
            .iter()
            .filter(|(seq, label)| model.forward(seq).unwrap().0.argmax() == *label)
            .count();
        assert_eq!(correct, train.len(), "loss history tail: {:?}", &history[history.len().saturating_sub(5)..]);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_unchanged() {
        let train = ramp_sequences(2, 6, 4);
        let mut hp = tiny_hp(4, 3);
        hp.learning_rate = 0.0;
        hp.epochs = 3;
        let (model, _) = LstmModel::fit(&train, 3, &hp).unwrap();
        let mut fresh = LstmModel::new_random(3, &hp);
        fresh.set_standardizer(model.standardizer().clone());
        assert_eq!(model.params(), fresh.params());
    }

    #[test]
    fn training_is_bitwise_deterministic_given_seed() {
        let train = ramp_sequences(4, 8, 9);
        let mut hp = tiny_hp(8, 21);
        hp.epochs = 5;
        let (a, ha) = LstmModel::fit(&train, 3, &hp).unwrap();
        let (b, hb) = LstmModel::fit(&train, 3, &hp).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn dimension_and_finiteness_errors_are_reported() {
        let model = LstmModel::new_random(3, &tiny_hp(4, 0));
        assert!(matches!(
            model.forward(&[vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            model.forward(&[vec![1.0, f64::NAN, 0.0]]),
            Err(Error::NonFinite { .. })
        ));
        assert!(model.forward(&[]).is_err());
    }
}
