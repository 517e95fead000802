//! Fully connected scalar regressor with hand-written backpropagation.
//!
//! Inputs are z-scored and targets min-max scaled to `[0, 1]` when training;
//! the loss is always computed on scaled targets, and [`NetworkModel::forward`]
//! maps predictions back to raw target units.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::synthdata::{Dataset, Sample};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Sigmoid,
}

/// `tanh` through `expm1`, which is noticeably cheaper than libm's `tanh`
/// and keeps full relative precision near zero.
#[inline]
fn fast_tanh(z: f64) -> f64 {
    if z > 20.0 {
        1.0
    } else {
        let e = (2.0 * z).exp_m1();
        e / (e + 2.0)
    }
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => fast_tanh(z),
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => crate::synthdata::sigmoid(z),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            input_dim: 1,
            hidden_layers: vec![64, 64],
            activation: Activation::Tanh,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("network.input_dim", "must be at least 1"));
        }
        if self.hidden_layers.is_empty() {
            return Err(Error::config(
                "network.hidden_layers",
                "at least one hidden layer is required",
            ));
        }
        if let Some(i) = self.hidden_layers.iter().position(|&w| w == 0) {
            return Err(Error::config(
                "network.hidden_layers",
                format!("layer {i} has zero width"),
            ));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every dense layer, ending in the scalar output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.hidden_layers);
        dims.push(1);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// One affine layer; `weights` has shape `(fan_out, fan_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Per-dimension z-score of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Population statistics; a zero deviation is replaced by 1.
    pub fn fit(samples: &[Sample], dim: usize) -> Self {
        let n = samples.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for s in samples {
            for (m, v) in mean.iter_mut().zip(&s.x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for s in samples {
            for ((acc, v), m) in var.iter_mut().zip(&s.x).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    #[inline]
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = (x[i] - self.mean[i]) / self.std[i];
        }
    }
}

/// Affine target map: `scaled = (y - shift) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub shift: f64,
    pub scale: f64,
}

impl TargetScaler {
    pub fn identity() -> Self {
        TargetScaler {
            shift: 0.0,
            scale: 1.0,
        }
    }

    /// Min-max map onto `[0, 1]`; constant targets get scale 1.
    pub fn fit(targets: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = targets.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            (lo.min(t), hi.max(t))
        });
        if lo > hi {
            return Self::identity();
        }
        let scale = hi - lo;
        TargetScaler {
            shift: lo,
            scale: if scale > 0.0 && scale.is_finite() { scale } else { 1.0 },
        }
    }

    #[inline]
    pub fn scale(&self, y: f64) -> f64 {
        (y - self.shift) / self.scale
    }

    #[inline]
    pub fn unscale(&self, s: f64) -> f64 {
        s * self.scale + self.shift
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    config: NetworkConfig,
    layers: Vec<Dense>,
    input_standardizer: Standardizer,
    target_scaler: TargetScaler,
}

/// Gradients of the scaled-space batch loss, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    fn zeros_like(layers: &[Dense]) -> Self {
        Gradients {
            weights: layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            biases: layers.iter().map(|l| Array1::zeros(l.biases.len())).collect(),
        }
    }

    /// Same order as [`NetworkModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

/// Initialize weights uniformly on `±sqrt(1 / fan_in)` with zero biases.
pub fn init_model(config: &NetworkConfig) -> Result<NetworkModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let layers = config
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let bound = (1.0 / fan_in as f64).sqrt();
            let weights =
                Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-bound..=bound));
            Dense {
                weights,
                biases: Array1::zeros(fan_out),
            }
        })
        .collect();
    Ok(NetworkModel {
        config: config.clone(),
        layers,
        input_standardizer: Standardizer::identity(config.input_dim),
        target_scaler: TargetScaler::identity(),
    })
}

impl NetworkModel {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_standardizer(&self) -> &Standardizer {
        &self.input_standardizer
    }

    pub fn target_scaler(&self) -> TargetScaler {
        self.target_scaler
    }

    pub fn set_scalers(&mut self, standardizer: Standardizer, scaler: TargetScaler) -> Result<()> {
        if standardizer.mean.len() != self.config.input_dim
            || standardizer.std.len() != self.config.input_dim
        {
            return Err(Error::InvalidInput("standardizer dimension mismatch".into()));
        }
        if standardizer.std.iter().any(|s| !(*s > 0.0 && s.is_finite())) || !(scaler.scale > 0.0) {
            return Err(Error::InvalidInput("scales must be positive".into()));
        }
        self.input_standardizer = standardizer;
        self.target_scaler = scaler;
        Ok(())
    }

    /// All weights and biases, layer by layer, weights row-major before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.biases.iter());
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let total: usize = self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum();
        if params.len() != total {
            return Err(Error::InvalidInput(format!(
                "expected {total} parameters, got {}",
                params.len()
            )));
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.config.input_dim {
            return Err(Error::InvalidInput(format!(
                "expected {} inputs, got {}",
                self.config.input_dim,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("input is not finite".into()));
        }
        Ok(())
    }

    fn standardized_matrix<'a>(&self, xs: impl ExactSizeIterator<Item = &'a [f64]>) -> Result<Array2<f64>> {
        let d = self.config.input_dim;
        let mut m = Array2::zeros((xs.len(), d));
        for (mut row, x) in m.rows_mut().into_iter().zip(xs) {
            self.check_input(x)?;
            self.input_standardizer
                .apply(x, row.as_slice_mut().expect("standard layout"));
        }
        Ok(m)
    }

    /// Forward pass on standardized inputs, keeping every layer's output.
    /// `acts[0]` is the input; the last entry is the scaled prediction.
    fn forward_trace(&self, input: Array2<f64>) -> Result<Vec<Array2<f64>>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&layer.weights.t());
            z += &layer.biases;
            if i < last {
                let act = self.config.activation;
                z.mapv_inplace(|v| act.apply(v));
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFailure { layer: i });
            }
            acts.push(z);
        }
        Ok(acts)
    }

    /// Scaled-space outputs for a batch of inputs.
    fn scaled_outputs(&self, xs: &[&[f64]]) -> Result<Vec<f64>> {
        let input = self.standardized_matrix(xs.iter().copied())?;
        let acts = self.forward_trace(input)?;
        Ok(acts.last().expect("output layer").column(0).to_vec())
    }

    /// Predict one input in raw target units.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let out = self.scaled_outputs(&[x])?;
        Ok(self.target_scaler.unscale(out[0]))
    }

    /// Predict many inputs in raw target units.
    pub fn predict(&self, xs: &[&[f64]]) -> Result<Vec<f64>> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let out = self.scaled_outputs(xs)?;
        Ok(out.into_iter().map(|s| self.target_scaler.unscale(s)).collect())
    }

    pub fn predict_samples(&self, samples: &[Sample]) -> Result<Vec<f64>> {
        let xs: Vec<&[f64]> = samples.iter().map(|s| s.x.as_slice()).collect();
        self.predict(&xs)
    }

    /// Mean loss over `batch` with targets mapped through the model's scaler.
    pub fn scaled_batch_loss(&self, batch: &[Sample], loss: &LossKind) -> Result<f64> {
        loss.validate()?;
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let xs: Vec<&[f64]> = batch.iter().map(|s| s.x.as_slice()).collect();
        let out = self.scaled_outputs(&xs)?;
        let total: f64 = out
            .iter()
            .zip(batch)
            .map(|(p, s)| loss.value_unchecked(p - self.target_scaler.scale(s.y)))
            .sum();
        Ok(total / batch.len() as f64)
    }

    /// Reverse-mode gradients of [`Self::scaled_batch_loss`].
    pub fn parameter_gradients(&self, batch: &[Sample], loss: &LossKind) -> Result<Gradients> {
        loss.validate()?;
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let input = self.standardized_matrix(batch.iter().map(|s| s.x.as_slice()))?;
        let targets: Vec<f64> = batch.iter().map(|s| self.target_scaler.scale(s.y)).collect();
        let mut grads = Gradients::zeros_like(&self.layers);
        self.backprop(input, &targets, loss, &mut grads)?;
        Ok(grads)
    }

    /// Fills `grads` and returns the summed (not averaged) batch loss.
    fn backprop(
        &self,
        input: Array2<f64>,
        targets: &[f64],
        loss: &LossKind,
        grads: &mut Gradients,
    ) -> Result<f64> {
        let acts = self.forward_trace(input)?;
        let n = targets.len() as f64;
        let out = acts.last().expect("output layer");
        let mut total = 0.0;
        let mut delta = Array2::from_shape_fn((targets.len(), 1), |(i, _)| {
            let r = out[(i, 0)] - targets[i];
            total += loss.value_unchecked(r);
            loss.gradient_unchecked(r) / n
        });
        let act = self.config.activation;
        for l in (0..self.layers.len()).rev() {
            let prev = &acts[l];
            grads.weights[l] = delta.t().dot(prev);
            grads.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut d_prev = delta.dot(&self.layers[l].weights);
                Zip::from(&mut d_prev)
                    .and(prev)
                    .for_each(|d, &a| *d *= act.derivative_from_output(a));
                delta = d_prev;
            }
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    #[serde(alias = "adam")]
    AdaptiveMoments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub first_moment_decay: f64,
    pub second_moment_decay: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::logcosh(),
            epochs: 2000,
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: Optimizer::AdaptiveMoments,
            first_moment_decay: 0.9,
            second_moment_decay: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss
            .validate()
            .map_err(|e| Error::config("training.loss", e.to_string()))?;
        if self.epochs == 0 {
            return Err(Error::config("training.epochs", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("training.batch_size", "must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("training.learning_rate", "must be positive"));
        }
        for (name, v) in [
            ("training.first_moment_decay", self.first_moment_decay),
            ("training.second_moment_decay", self.second_moment_decay),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(name, "must lie in (0, 1)"));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("training.epsilon", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean per-sample loss seen during each epoch, before that batch's update.
    pub epoch_losses: Vec<f64>,
    pub final_train_loss: f64,
    pub final_validation_loss: Option<f64>,
    pub epochs_run: usize,
}

struct Moments {
    m: Gradients,
    v: Gradients,
    step: i32,
}

/// Fit scalers to `data`, then run mini-batch descent for `tc.epochs` epochs.
///
/// The batch order is reshuffled every epoch from `tc.seed`. Returns the
/// trained copy and its loss history; `validation` is evaluated once at the end.
pub fn train(
    model: &NetworkModel,
    data: &Dataset,
    validation: Option<&Dataset>,
    tc: &TrainConfig,
) -> Result<(NetworkModel, TrainReport)> {
    tc.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty dataset".into()));
    }
    if data.input_dim() != model.config.input_dim {
        return Err(Error::InvalidInput(format!(
            "dataset has {} inputs, model expects {}",
            data.input_dim(),
            model.config.input_dim
        )));
    }
    if tc.batch_size > data.len() {
        return Err(Error::config(
            "training.batch_size",
            format!("{} exceeds dataset size {}", tc.batch_size, data.len()),
        ));
    }

    let mut model = model.clone();
    model.input_standardizer = Standardizer::fit(data.samples(), data.input_dim());
    model.target_scaler = TargetScaler::fit(data.samples().iter().map(|s| s.y));

    let d = data.input_dim();
    let inputs = model.standardized_matrix(data.samples().iter().map(|s| s.x.as_slice()))?;
    let targets: Vec<f64> = data.samples().iter().map(|s| model.target_scaler.scale(s.y)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = Gradients::zeros_like(&model.layers);
    let mut moments = Moments {
        m: Gradients::zeros_like(&model.layers),
        v: Gradients::zeros_like(&model.layers),
        step: 0,
    };
    let mut epoch_losses = Vec::with_capacity(tc.epochs);
    let mut batch_targets = Vec::with_capacity(tc.batch_size);

    for epoch in 0..tc.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(tc.batch_size) {
            let mut batch = Array2::zeros((chunk.len(), d));
            batch_targets.clear();
            for (mut row, &i) in batch.rows_mut().into_iter().zip(chunk) {
                row.assign(&inputs.row(i));
                batch_targets.push(targets[i]);
            }
            total += match model.backprop(batch, &batch_targets, &tc.loss, &mut grads) {
                Ok(t) => t,
                Err(Error::NumericalFailure { .. }) => {
                    return Err(Error::TrainingDiverged {
                        epoch,
                        loss: f64::NAN,
                    })
                }
                Err(e) => return Err(e),
            };
            apply_update(&mut model.layers, &grads, &mut moments, tc);
        }
        let epoch_loss = total / data.len() as f64;
        let limit = epoch_losses.first().map_or(f64::INFINITY, |first: &f64| 1e6 * first);
        if !epoch_loss.is_finite() || epoch_loss > limit {
            return Err(Error::TrainingDiverged {
                epoch,
                loss: epoch_loss,
            });
        }
        epoch_losses.push(epoch_loss);
    }

    let final_train_loss = model.scaled_batch_loss(data.samples(), &tc.loss)?;
    let final_validation_loss = match validation {
        Some(v) if !v.is_empty() => Some(model.scaled_batch_loss(v.samples(), &tc.loss)?),
        _ => None,
    };
    let report = TrainReport {
        epochs_run: epoch_losses.len(),
        epoch_losses,
        final_train_loss,
        final_validation_loss,
    };
    Ok((model, report))
}

fn apply_update(layers: &mut [Dense], grads: &Gradients, moments: &mut Moments, tc: &TrainConfig) {
    let lr = tc.learning_rate;
    match tc.optimizer {
        Optimizer::Sgd => {
            for (l, (gw, gb)) in layers.iter_mut().zip(grads.weights.iter().zip(&grads.biases)) {
                l.weights.scaled_add(-lr, gw);
                l.biases.scaled_add(-lr, gb);
            }
        }
        Optimizer::AdaptiveMoments => {
            moments.step += 1;
            let (b1, b2, eps) = (tc.first_moment_decay, tc.second_moment_decay, tc.epsilon);
            let c1 = 1.0 - b1.powi(moments.step);
            let c2 = 1.0 - b2.powi(moments.step);
            let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            };
            for (i, l) in layers.iter_mut().enumerate() {
                Zip::from(&mut l.weights)
                    .and(&mut moments.m.weights[i])
                    .and(&mut moments.v.weights[i])
                    .and(&grads.weights[i])
                    .for_each(update);
                Zip::from(&mut l.biases)
                    .and(&mut moments.m.biases[i])
                    .and(&mut moments.v.biases[i])
                    .and(&grads.biases[i])
                    .for_each(update);
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerDocument {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    config: NetworkConfig,
    layers: Vec<LayerDocument>,
    input_standardizer: Standardizer,
    target_scaler: TargetScaler,
}

impl NetworkModel {
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            config: self.config.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerDocument {
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    biases: l.biases.to_vec(),
                })
                .collect(),
            input_standardizer: self.input_standardizer.clone(),
            target_scaler: self.target_scaler,
        };
        serde_json::to_value(doc).expect("model document serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("model document serializes")
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_value(value)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported model format_version {}",
                doc.format_version
            )));
        }
        doc.config.validate()?;
        let shapes = doc.config.layer_shapes();
        if shapes.len() != doc.layers.len() {
            return Err(Error::InvalidInput("layer count does not match config".into()));
        }
        let mut layers = Vec::with_capacity(shapes.len());
        for (i, ((fan_in, fan_out), l)) in shapes.into_iter().zip(doc.layers).enumerate() {
            if l.weights.len() != fan_out
                || l.weights.iter().any(|r| r.len() != fan_in)
                || l.biases.len() != fan_out
            {
                return Err(Error::InvalidInput(format!("layer {i} has the wrong shape")));
            }
            let flat: Vec<f64> = l.weights.into_iter().flatten().collect();
            if flat.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("layer {i} has non-finite parameters")));
            }
            layers.push(Dense {
                weights: Array2::from_shape_vec((fan_out, fan_in), flat)
                    .expect("shape checked above"),
                biases: Array1::from(l.biases),
            });
        }
        let mut model = NetworkModel {
            input_standardizer: Standardizer::identity(doc.config.input_dim),
            target_scaler: TargetScaler::identity(),
            config: doc.config,
            layers,
        };
        model.set_scalers(doc.input_standardizer, doc.target_scaler)?;
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_value(serde_json::from_str(text)?)
    }
}
