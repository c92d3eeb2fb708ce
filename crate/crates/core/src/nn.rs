//! A small fully connected network: forward passes with activation capture,
//! inverted dropout, Adam training and a JSON model format.
//!
//! Everything is `f64` and single-threaded so that a fixed seed reproduces
//! trained parameters bit for bit.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputMode {
    #[serde(rename = "regression")]
    Regression,
    #[serde(rename = "softmax-classification")]
    Classification,
}

/// Dense layer `y = act(W x + b)` with `W` stored row-major (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(invalid("layer dimensions must be positive"));
        }
        if weights.len() != inputs * outputs {
            return Err(Error::DimensionMismatch {
                expected: inputs * outputs,
                got: weights.len(),
            });
        }
        if bias.len() != outputs {
            return Err(Error::DimensionMismatch {
                expected: outputs,
                got: bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
            activation,
        })
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }
}

/// Hidden post-activations and last-layer pre-activation for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationTrace {
    pub hidden: Vec<Vec<f64>>,
    pub last_pre_activation: Vec<f64>,
}

#[derive(Debug)]
pub struct MlpModel {
    layers: Vec<Layer>,
    output_mode: OutputMode,
    passes: AtomicUsize,
}

impl Clone for MlpModel {
    fn clone(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            output_mode: self.output_mode,
            passes: AtomicUsize::new(0),
        }
    }
}

impl PartialEq for MlpModel {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.output_mode == other.output_mode
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl MlpModel {
    pub fn new(layers: Vec<Layer>, output_mode: OutputMode) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("model needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].outputs,
                    got: pair[1].inputs,
                });
            }
        }
        if output_mode == OutputMode::Classification && layers.last().map(|l| l.outputs) < Some(2) {
            return Err(invalid("classification needs at least two outputs"));
        }
        Ok(Self {
            layers,
            output_mode,
            passes: AtomicUsize::new(0),
        })
    }

    /// He-style uniform initialization `U(-√(6/fan_in), √(6/fan_in))`, zero
    /// biases, relu on hidden layers and identity on the last.
    pub fn init(sizes: &[usize], output_mode: OutputMode, rng: &mut impl Rng) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(invalid("need at least input and output sizes"));
        }
        let n = sizes.len() - 1;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let lim = (6.0 / w[0] as f64).sqrt();
                let weights = (0..w[0] * w[1]).map(|_| rng.random_range(-lim..lim)).collect();
                let act = if i + 1 == n {
                    Activation::Identity
                } else {
                    Activation::Relu
                };
                Layer::new(w[0], w[1], weights, vec![0.0; w[1]], act)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers, output_mode)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_mode(&self) -> OutputMode {
        self.output_mode
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn num_hidden(&self) -> usize {
        self.layers.len() - 1
    }

    /// Number of single-input forward passes (deterministic or dropout)
    /// since construction or the last reset.
    pub fn forward_pass_count(&self) -> usize {
        self.passes.load(Ordering::Relaxed)
    }

    pub fn reset_forward_pass_count(&self) {
        self.passes.store(0, Ordering::Relaxed);
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    fn finish_output(&self, z: Vec<f64>) -> Vec<f64> {
        match self.output_mode {
            OutputMode::Regression => z,
            OutputMode::Classification => softmax(&z),
        }
    }

    fn run<R: Rng + ?Sized>(&self, input: &[f64], mut dropout: Option<(f64, &mut R)>) -> (Vec<f64>, ActivationTrace) {
        self.passes.fetch_add(1, Ordering::Relaxed);
        let last = self.layers.len() - 1;
        let mut hidden = Vec::with_capacity(last);
        let mut h = input.to_vec();
        for layer in &self.layers[..last] {
            let mut a: Vec<f64> = layer
                .pre_activation(&h)
                .into_iter()
                .map(|z| layer.activation.apply(z))
                .collect();
            if let Some((rate, rng)) = dropout.as_mut() {
                apply_mask(&mut a, *rate, &mut **rng);
            }
            hidden.push(a.clone());
            h = a;
        }
        let z = self.layers[last].pre_activation(&h);
        let out: Vec<f64> = z.iter().map(|&v| self.layers[last].activation.apply(v)).collect();
        (
            self.finish_output(out),
            ActivationTrace {
                hidden,
                last_pre_activation: z,
            },
        )
    }

    /// Deterministic forward pass. The output is the raw last layer for
    /// regression and softmax probabilities for classification.
    pub fn forward_capture(&self, input: &[f64]) -> Result<(Vec<f64>, ActivationTrace)> {
        self.check_input(input)?;
        Ok(self.run::<ChaCha8Rng>(input, None))
    }

    /// One stochastic pass with fresh inverted-dropout masks on every hidden
    /// layer.
    pub fn dropout_forward<R: Rng + ?Sized>(&self, input: &[f64], rate: f64, rng: &mut R) -> Result<Vec<f64>> {
        check_rate(rate)?;
        self.check_input(input)?;
        let masks = if rate > 0.0 { Some((rate, rng)) } else { None };
        Ok(self.run(input, masks).0)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            output_mode: self.output_mode,
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    activation: l.activation,
                    inputs: l.inputs,
                    outputs: l.outputs,
                    weights: l.weights.chunks_exact(l.inputs).map(<[f64]>::to_vec).collect(),
                    bias: l.bias.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        let layers = file
            .layers
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                if l.weights.len() != l.outputs || l.weights.iter().any(|r| r.len() != l.inputs) {
                    return Err(Error::ModelFormat(format!(
                        "layers[{i}].weights must be {}×{}",
                        l.outputs, l.inputs
                    )));
                }
                Layer::new(l.inputs, l.outputs, l.weights.concat(), l.bias, l.activation)
                    .map_err(|e| Error::ModelFormat(format!("layers[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers, file.output_mode).map_err(|e| Error::ModelFormat(e.to_string()))
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(invalid(format!("dropout rate must be in [0, 1), got {rate}")))
    }
}

fn apply_mask<R: Rng + ?Sized>(a: &mut [f64], rate: f64, rng: &mut R) -> Vec<f64> {
    let scale = 1.0 / (1.0 - rate);
    a.iter_mut()
        .map(|v| {
            let keep = if rng.random::<f64>() >= rate { scale } else { 0.0 };
            *v *= keep;
            keep
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    output_mode: OutputMode,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    activation: Activation,
    inputs: usize,
    outputs: usize,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = model.to_json()?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    MlpModel::from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// 0 means full batch.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 0,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            dropout_rate: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(invalid("epochs must be >= 1"));
        }
        check_rate(self.dropout_rate)?;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(invalid("adam betas must be in [0, 1)"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Parameter gradients, one `(dW, db)` pair per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(model: &MlpModel) -> Self {
        Self {
            weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }
}

enum Target<'a> {
    Values(&'a [f64]),
    Class(usize),
}

fn resolve_target<'a>(model: &MlpModel, t: &'a [f64]) -> Result<Target<'a>> {
    let m = model.output_dim();
    match model.output_mode {
        OutputMode::Regression if t.len() == m => Ok(Target::Values(t)),
        OutputMode::Classification if t.len() == 1 => {
            let c = t[0];
            if c >= 0.0 && c.fract() == 0.0 && (c as usize) < m {
                Ok(Target::Class(c as usize))
            } else {
                Err(invalid(format!("class label {c} is not in 0..{m}")))
            }
        }
        OutputMode::Classification if t.len() == m => Ok(Target::Values(t)),
        _ => Err(Error::DimensionMismatch {
            expected: m,
            got: t.len(),
        }),
    }
}

/// Loss of one sample and accumulation of `scale · ∂loss/∂θ` into `grads`.
fn backprop_sample<R: Rng + ?Sized>(
    model: &MlpModel,
    x: &[f64],
    target: &Target<'_>,
    scale: f64,
    grads: &mut Gradients,
    mut dropout: Option<(f64, &mut R)>,
) -> f64 {
    let last = model.layers.len() - 1;
    let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(model.layers.len());
    let mut pre: Vec<Vec<f64>> = Vec::with_capacity(model.layers.len());
    let mut masks: Vec<Option<Vec<f64>>> = Vec::with_capacity(last);
    let mut h = x.to_vec();
    for (i, layer) in model.layers.iter().enumerate() {
        let z = layer.pre_activation(&h);
        let mut a: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
        if i < last {
            masks.push(
                dropout
                    .as_mut()
                    .map(|(rate, rng)| apply_mask(&mut a, *rate, &mut **rng)),
            );
        }
        inputs.push(h);
        pre.push(z);
        h = a;
    }

    let (loss, mut delta) = match (model.output_mode, target) {
        (OutputMode::Regression, Target::Values(t)) => {
            let loss = h.iter().zip(*t).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
            let d: Vec<f64> = h
                .iter()
                .zip(*t)
                .zip(&pre[last])
                .map(|((y, t), z)| 2.0 * (y - t) * model.layers[last].activation.derivative(*z))
                .collect();
            (loss, d)
        }
        (OutputMode::Classification, t) => {
            let p = softmax(&h);
            let onehot: Vec<f64> = match t {
                Target::Class(c) => (0..p.len()).map(|j| if j == *c { 1.0 } else { 0.0 }).collect(),
                Target::Values(v) => v.to_vec(),
            };
            let loss = -onehot
                .iter()
                .zip(&p)
                .filter(|(t, _)| **t > 0.0)
                .map(|(t, p)| t * p.max(f64::MIN_POSITIVE).ln())
                .sum::<f64>();
            let d: Vec<f64> = p
                .iter()
                .zip(&onehot)
                .zip(&pre[last])
                .map(|((p, t), z)| (p - t) * model.layers[last].activation.derivative(*z))
                .collect();
            (loss, d)
        }
        (OutputMode::Regression, Target::Class(_)) => unreachable!("regression targets are values"),
    };

    for i in (0..model.layers.len()).rev() {
        let layer = &model.layers[i];
        let gw = &mut grads.weights[i];
        for (o, d) in delta.iter().enumerate() {
            grads.biases[i][o] += scale * d;
            for (j, v) in inputs[i].iter().enumerate() {
                gw[o * layer.inputs + j] += scale * d * v;
            }
        }
        if i == 0 {
            break;
        }
        let prev = &model.layers[i - 1];
        let mut next = vec![0.0; layer.inputs];
        for (o, d) in delta.iter().enumerate() {
            for (j, n) in next.iter_mut().enumerate() {
                *n += layer.weight(o, j) * d;
            }
        }
        for (j, n) in next.iter_mut().enumerate() {
            *n *= prev.activation.derivative(pre[i - 1][j]);
            if let Some(m) = &masks[i - 1] {
                *n *= m[j];
            }
        }
        delta = next;
    }
    loss
}

fn check_data(model: &MlpModel, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if inputs.is_empty() {
        return Err(invalid("training data is empty"));
    }
    if inputs.len() != targets.len() {
        return Err(invalid(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    for (x, t) in inputs.iter().zip(targets) {
        model.check_input(x)?;
        resolve_target(model, t)?;
    }
    Ok(())
}

/// Mean loss over the batch and its exact gradient (no dropout). Regression
/// uses squared error summed over outputs; classification uses softmax
/// cross-entropy.
pub fn loss_and_gradients(model: &MlpModel, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, Gradients)> {
    check_data(model, inputs, targets)?;
    let mut grads = Gradients::zeros(model);
    let scale = 1.0 / inputs.len() as f64;
    let mut loss = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        let target = resolve_target(model, t)?;
        loss += backprop_sample::<ChaCha8Rng>(model, x, &target, scale, &mut grads, None);
    }
    Ok((loss * scale, grads))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Mean training loss per epoch (with dropout active).
    pub loss_history: Vec<f64>,
}

struct Adam {
    m: Gradients,
    v: Gradients,
    step: i32,
}

impl Adam {
    fn update(&mut self, model: &mut MlpModel, g: &Gradients, cfg: &TrainConfig) {
        self.step += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.step);
        let c2 = 1.0 - cfg.beta2.powi(self.step);
        for (i, layer) in model.layers.iter_mut().enumerate() {
            let params = layer
                .weights
                .iter_mut()
                .zip(&g.weights[i])
                .zip(self.m.weights[i].iter_mut().zip(self.v.weights[i].iter_mut()));
            let biases = layer
                .bias
                .iter_mut()
                .zip(&g.biases[i])
                .zip(self.m.biases[i].iter_mut().zip(self.v.biases[i].iter_mut()));
            for ((p, g), (m, v)) in params.chain(biases) {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Adam training with seeded shuffling and dropout masks.
pub fn train(model: &MlpModel, inputs: &[Vec<f64>], targets: &[Vec<f64>], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_data(model, inputs, targets)?;
    let resolved = targets
        .iter()
        .map(|t| resolve_target(model, t))
        .collect::<Result<Vec<_>>>()?;
    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam {
        m: Gradients::zeros(&model),
        v: Gradients::zeros(&model),
        step: 0,
    };
    let n = inputs.len();
    let batch = if cfg.batch_size == 0 { n } else { cfg.batch_size.min(n) };
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let mut grads = Gradients::zeros(&model);
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let dropout = (cfg.dropout_rate > 0.0).then_some((cfg.dropout_rate, &mut rng));
                epoch_loss += backprop_sample(&model, &inputs[i], &resolved[i], scale, &mut grads, dropout) / n as f64;
            }
            adam.update(&mut model, &grads, cfg);
        }
        if !epoch_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                loss: epoch_loss,
            });
        }
        history.push(epoch_loss);
    }
    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(w: f64) -> MlpModel {
        MlpModel::new(
            vec![Layer::new(1, 1, vec![w], vec![0.0], Activation::Identity).unwrap()],
            OutputMode::Regression,
        )
        .unwrap()
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let m = MlpModel::new(
            vec![Layer::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], Activation::Identity).unwrap()],
            OutputMode::Regression,
        )
        .unwrap();
        let (out, trace) = m.forward_capture(&[0.3, -2.0]).unwrap();
        assert_eq!(out, vec![0.3, -2.0]);
        assert!(trace.hidden.is_empty());
        assert_eq!(trace.last_pre_activation, vec![0.3, -2.0]);
    }

    #[test]
    fn relu_gates_negative_input() {
        let m = MlpModel::new(
            vec![
                Layer::new(1, 1, vec![-1.0], vec![0.0], Activation::Relu).unwrap(),
                Layer::new(1, 1, vec![1.0], vec![0.0], Activation::Identity).unwrap(),
            ],
            OutputMode::Regression,
        )
        .unwrap();
        let (_, trace) = m.forward_capture(&[2.0]).unwrap();
        assert_eq!(trace.hidden, vec![vec![0.0]]);
    }

    #[test]
    fn construction_errors() {
        let a = Layer::new(2, 3, vec![0.0; 6], vec![0.0; 3], Activation::Relu).unwrap();
        let b = Layer::new(2, 1, vec![0.0; 2], vec![0.0], Activation::Identity).unwrap();
        assert!(MlpModel::new(vec![a, b], OutputMode::Regression).is_err());
        assert!(Layer::new(2, 3, vec![0.0; 5], vec![0.0; 3], Activation::Relu).is_err());
        assert!(Layer::new(1, 1, vec![f64::NAN], vec![0.0], Activation::Relu).is_err());
        assert!(linear(1.0).forward_capture(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn learns_linear_map() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![-1.0 + i as f64 * 0.1]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![2.0 * x[0]]).collect();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let out = train(&linear(0.1), &xs, &ys, &cfg).unwrap();
        let w = out.model.layers()[0].weights[0];
        assert!((w - 2.0).abs() < 0.05, "{w}");
        assert_eq!(out.loss_history.len(), 200);
        assert!(out.loss_history[199] < out.loss_history[0]);
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train(&linear(1.0), &[vec![1.0]], &[vec![1.0]], &cfg).is_err());
        let cfg = TrainConfig {
            dropout_rate: 1.0,
            ..TrainConfig::default()
        };
        assert!(train(&linear(1.0), &[vec![1.0]], &[vec![1.0]], &cfg).is_err());
        assert!(train(&linear(1.0), &[], &[], &TrainConfig::default()).is_err());
    }

    #[test]
    fn non_finite_loss_aborts() {
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let err = train(&linear(1.0), &[vec![1e200]], &[vec![0.0]], &cfg).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { epoch: 0, .. }), "{err}");
    }

    #[test]
    fn dropout_rate_zero_is_deterministic_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MlpModel::init(&[2, 8, 8, 1], OutputMode::Regression, &mut rng).unwrap();
        let x = [0.4, -0.9];
        let det = m.forward_capture(&x).unwrap().0;
        assert_eq!(m.dropout_forward(&x, 0.0, &mut rng).unwrap(), det);
        let a = m.dropout_forward(&x, 0.5, &mut rng).unwrap();
        let b = m.dropout_forward(&x, 0.5, &mut rng).unwrap();
        assert_ne!(a, b);
        assert!(m.dropout_forward(&x, 1.0, &mut rng).is_err());
        assert!(m.dropout_forward(&x, -0.1, &mut rng).is_err());
    }

    #[test]
    fn pass_counter_counts_single_input_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = MlpModel::init(&[1, 4, 1], OutputMode::Regression, &mut rng).unwrap();
        m.forward_capture(&[0.1]).unwrap();
        m.dropout_forward(&[0.1], 0.2, &mut rng).unwrap();
        assert_eq!(m.forward_pass_count(), 2);
        m.reset_forward_pass_count();
        assert_eq!(m.forward_pass_count(), 0);
    }

    #[test]
    fn softmax_output_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = MlpModel::init(&[2, 5, 3], OutputMode::Classification, &mut rng).unwrap();
        let (p, trace) = m.forward_capture(&[1.0, -1.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(trace.last_pre_activation.len(), 3);
    }

    #[test]
    fn json_rejects_malformed() {
        let m = linear(0.5);
        let text = m.to_json().unwrap();
        assert!(matches!(
            MlpModel::from_json(&text[..text.len() / 2]),
            Err(Error::ModelFormat(_))
        ));
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(MlpModel::from_json(&bumped), Err(Error::ModelFormat(_))));
        assert_eq!(MlpModel::from_json(&text).unwrap(), m);
    }
}
