//! Single-layer networks `y = f(W u)` without a bias term.
//!
//! Two activation/loss pairings are supported: linear output with mean
//! squared error, and softmax output with categorical cross-entropy.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DatasetKind, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::{argmax_tiebreak_low, axpy, Matrix};
use crate::rng;

/// Floor inside the cross-entropy logarithm.
pub const CE_EPSILON: f64 = 1e-12;

/// Half-width of the uniform weight initialisation interval.
pub const INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    CrossEntropy,
}

/// The two valid activation/loss combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    LinearMse,
    SoftmaxCe,
}

impl Pairing {
    pub const ALL: [Pairing; 2] = [Pairing::LinearMse, Pairing::SoftmaxCe];

    pub fn activation(self) -> Activation {
        match self {
            Pairing::LinearMse => Activation::Linear,
            Pairing::SoftmaxCe => Activation::Softmax,
        }
    }

    pub fn loss(self) -> LossKind {
        match self {
            Pairing::LinearMse => LossKind::Mse,
            Pairing::SoftmaxCe => LossKind::CrossEntropy,
        }
    }

    pub fn from_parts(activation: Activation, loss: LossKind) -> Result<Self> {
        match (activation, loss) {
            (Activation::Linear, LossKind::Mse) => Ok(Pairing::LinearMse),
            (Activation::Softmax, LossKind::CrossEntropy) => Ok(Pairing::SoftmaxCe),
            (a, l) => Err(Error::InvalidArgument(format!(
                "unsupported activation/loss pairing {a:?}/{l:?}"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pairing::LinearMse => "linear_mse",
            Pairing::SoftmaxCe => "softmax_ce",
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_mse" => Ok(Pairing::LinearMse),
            "softmax_ce" => Ok(Pairing::SoftmaxCe),
            other => Err(Error::Config(format!(
                "unknown pairing `{other}`; valid options: linear_mse, softmax_ce"
            ))),
        }
    }
}

/// Whether adversarial inputs are clipped back into `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipPolicy {
    #[default]
    Clip,
    Unclipped,
}

impl ClipPolicy {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ClipPolicy::Clip => v.clamp(0.0, 1.0),
            ClipPolicy::Unclipped => v,
        }
    }
}

/// Mini-batch SGD settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// 20 epochs of batch-128 SGD. The learning rate is 0.1 (softmax/CE) or
    /// 0.01 (linear/MSE) on MNIST and ten times smaller on CIFAR-10, whose
    /// larger inputs make the MNIST rates unstable.
    pub fn default_for(dataset: DatasetKind, pairing: Pairing, seed: u64) -> Self {
        let base = match pairing {
            Pairing::LinearMse => 0.01,
            Pairing::SoftmaxCe => 0.1,
        };
        Self {
            epochs: 20,
            batch_size: 128,
            learning_rate: match dataset {
                DatasetKind::Mnist => base,
                DatasetKind::Cifar10 => base / 10.0,
            },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Pre-activation and post-activation outputs of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub logits: Vec<f64>,
    pub output: Vec<f64>,
}

/// `y = f(W u)` with `W` of shape `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayerModel {
    weights: Matrix,
    pairing: Pairing,
}

impl LinearLayerModel {
    pub fn new(weights: Matrix, pairing: Pairing) -> Result<Self> {
        if !weights.is_finite() {
            return Err(Error::NonFinite("model weights"));
        }
        Ok(Self { weights, pairing })
    }

    pub fn zeros(pairing: Pairing, outputs: usize, inputs: usize) -> Self {
        Self {
            weights: Matrix::zeros(outputs, inputs),
            pairing,
        }
    }

    /// Weights drawn uniformly from `[-INIT_SCALE, INIT_SCALE]`.
    pub fn initialized(pairing: Pairing, outputs: usize, inputs: usize, seed: u64) -> Self {
        let mut rng = rng::stream(rng::derive_seed(seed, "init"));
        let data = (0..outputs * inputs)
            .map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE))
            .collect();
        Self {
            weights: Matrix::from_vec(outputs, inputs, data).expect("shape matches"),
            pairing,
        }
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn activation(&self) -> Activation {
        self.pairing.activation()
    }

    pub fn loss_kind(&self) -> LossKind {
        self.pairing.loss()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    fn check_input(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.inputs() {
            return Err(Error::DimensionMismatch {
                op: "forward",
                left: self.weights.shape(),
                right: (u.len(), 1),
            });
        }
        Ok(())
    }

    pub fn forward(&self, u: &[f64]) -> Result<Forward> {
        self.check_input(u)?;
        let mut logits = vec![0.0; self.outputs()];
        self.weights.matvec_into(u, &mut logits);
        let output = activate(self.activation(), &logits);
        Ok(Forward { logits, output })
    }

    /// Predicted class: argmax of the output, lowest index on ties.
    pub fn predict(&self, u: &[f64]) -> Result<usize> {
        let f = self.forward(u)?;
        argmax_tiebreak_low(&f.output)
    }

    /// Loss of `output` against a one-hot `target`.
    pub fn loss(&self, output: &[f64], target: &[f64]) -> f64 {
        loss_value(self.loss_kind(), output, target)
    }

    /// `dL/du` at `u` for the given one-hot target.
    ///
    /// Linear/MSE gives `(2/M) W^T (y - t)`; softmax/CE gives `W^T (y - t)`,
    /// the full softmax Jacobian contracted with the CE derivative.
    pub fn input_sensitivity(&self, u: &[f64], target: &[f64]) -> Result<Vec<f64>> {
        let f = self.forward(u)?;
        let residual = self.output_residual(&f.output, target)?;
        self.weights.matvec_transposed(&residual)
    }

    /// `dL/ds`: the gradient with respect to the pre-activation outputs.
    fn output_residual(&self, output: &[f64], target: &[f64]) -> Result<Vec<f64>> {
        if target.len() != output.len() {
            return Err(Error::DimensionMismatch {
                op: "residual",
                left: (output.len(), 1),
                right: (target.len(), 1),
            });
        }
        let scale = residual_scale(self.loss_kind(), output.len());
        Ok(output.iter().zip(target).map(|(y, t)| scale * (y - t)).collect())
    }

    /// `epsilon * sgn(dL/du)` with `sgn(0) = 0`.
    pub fn fgsm_perturbation(&self, u: &[f64], target: &[f64], epsilon: f64) -> Result<Vec<f64>> {
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let g = self.input_sensitivity(u, target)?;
        Ok(g.iter().map(|&v| epsilon * sign(v)).collect())
    }

    /// `u + epsilon * sgn(dL/du)`, clipped per `clip`.
    pub fn fgsm_example(&self, u: &[f64], target: &[f64], epsilon: f64, clip: ClipPolicy) -> Result<Vec<f64>> {
        let r = self.fgsm_perturbation(u, target, epsilon)?;
        Ok(u.iter().zip(&r).map(|(a, b)| clip.apply(a + b)).collect())
    }

    /// Fraction of samples whose predicted class equals the label. An empty
    /// dataset yields 0.0.
    pub fn accuracy(&self, ds: &LabeledDataset) -> Result<f64> {
        if ds.is_empty() {
            log::warn!("accuracy requested on an empty dataset; reporting 0.0");
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for i in 0..ds.len() {
            if self.predict(ds.input(i))? == ds.label(i) {
                correct += 1;
            }
        }
        Ok(correct as f64 / ds.len() as f64)
    }

    /// Trains a fresh model from all-zero weights.
    pub fn fit(pairing: Pairing, ds: &LabeledDataset, cfg: &TrainConfig) -> Result<LinearLayerModel> {
        Self::zeros(pairing, ds.num_classes(), ds.feature_dim()).train(ds, cfg)
    }

    /// Mini-batch SGD on the model's loss with one-hot targets, starting from
    /// the current weights. Batches are drawn from a per-epoch shuffle seeded
    /// by `cfg.seed`, so the result is bit-for-bit reproducible.
    pub fn train(&self, ds: &LabeledDataset, cfg: &TrainConfig) -> Result<LinearLayerModel> {
        cfg.validate()?;
        if ds.feature_dim() != self.inputs() || ds.num_classes() != self.outputs() {
            return Err(Error::DimensionMismatch {
                op: "train",
                left: self.weights.shape(),
                right: (ds.num_classes(), ds.feature_dim()),
            });
        }
        let mut model = self.clone();
        if cfg.epochs == 0 || ds.is_empty() {
            return Ok(model);
        }
        let (m, n) = model.weights.shape();
        let kind = model.loss_kind();
        let scale = residual_scale(kind, m);
        let mut rng = rng::stream(rng::derive_seed(cfg.seed, "shuffle"));
        let mut order: Vec<usize> = (0..ds.len()).collect();
        let mut grad = Matrix::zeros(m, n);
        let mut logits = vec![0.0; m];
        let mut target = vec![0.0; m];

        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
                grad.as_mut_slice().fill(0.0);
                let mut batch_loss = 0.0;
                let inv_b = 1.0 / batch.len() as f64;
                for &s in batch {
                    let u = ds.input(s);
                    model.weights.matvec_into(u, &mut logits);
                    let out = activate(model.activation(), &logits);
                    one_hot_into(ds.label(s), &mut target);
                    batch_loss += loss_value(kind, &out, &target);
                    for i in 0..m {
                        let coef = scale * (out[i] - target[i]) * inv_b;
                        if coef != 0.0 {
                            axpy(coef, u, grad.row_mut(i));
                        }
                    }
                }
                if !batch_loss.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        batch: batch_idx,
                        loss: batch_loss * inv_b,
                    });
                }
                axpy(-cfg.learning_rate, grad.as_slice(), model.weights.as_mut_slice());
            }
        }
        if !model.weights.is_finite() {
            return Err(Error::NonFinite("trained weights"));
        }
        Ok(model)
    }

    /// Writes the model in the text format described in the README.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_text().as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Format { offset, reason, .. } => Error::Format {
                path: path.to_path_buf(),
                offset,
                reason,
            },
            other => other,
        })
    }

    pub fn to_text(&self) -> String {
        let (m, n) = self.weights.shape();
        let mut s = format!(
            "xbar-model 1\noutputs {m}\ninputs {n}\nactivation {}\nloss {}\n",
            activation_name(self.activation()),
            loss_name(self.loss_kind())
        );
        for i in 0..m {
            let row: Vec<String> = self.weights.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |offset: usize, reason: String| Error::Format {
            path: "<model>".into(),
            offset: offset as u64,
            reason,
        };
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<String> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| bad(text.len(), format!("missing `{key}` line")))?;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
                _ => Err(bad(no, format!("expected `{key} <value>` on line {}", no + 1))),
            }
        };
        let version = header("xbar-model")?;
        if version != "1" {
            return Err(bad(0, format!("unsupported model format version {version}")));
        }
        let m: usize = header("outputs")?
            .parse()
            .map_err(|e| bad(1, format!("outputs: {e}")))?;
        let n: usize = header("inputs")?.parse().map_err(|e| bad(2, format!("inputs: {e}")))?;
        let activation = match header("activation")?.as_str() {
            "linear" => Activation::Linear,
            "softmax" => Activation::Softmax,
            other => return Err(bad(3, format!("unknown activation `{other}`"))),
        };
        let loss = match header("loss")?.as_str() {
            "mse" => LossKind::Mse,
            "cross_entropy" => LossKind::CrossEntropy,
            other => return Err(bad(4, format!("unknown loss `{other}`"))),
        };
        let pairing = Pairing::from_parts(activation, loss)?;
        let mut data = Vec::with_capacity(m * n);
        for (no, line) in lines {
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|e| bad(no, format!("line {}: {e}", no + 1)))?;
                data.push(v);
            }
        }
        if data.len() != m * n {
            return Err(bad(5, format!("expected {} weights, found {}", m * n, data.len())));
        }
        Self::new(Matrix::from_vec(m, n, data)?, pairing)
    }
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Linear => "linear",
        Activation::Softmax => "softmax",
    }
}

fn loss_name(l: LossKind) -> &'static str {
    match l {
        LossKind::Mse => "mse",
        LossKind::CrossEntropy => "cross_entropy",
    }
}

/// `dL/ds = scale * (y - t)` for both supported pairings.
#[inline]
fn residual_scale(kind: LossKind, outputs: usize) -> f64 {
    match kind {
        LossKind::Mse => 2.0 / outputs as f64,
        LossKind::CrossEntropy => 1.0,
    }
}

pub fn activate(activation: Activation, logits: &[f64]) -> Vec<f64> {
    match activation {
        Activation::Linear => logits.to_vec(),
        Activation::Softmax => softmax(logits),
    }
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn loss_value(kind: LossKind, output: &[f64], target: &[f64]) -> f64 {
    match kind {
        LossKind::Mse => {
            let m = output.len() as f64;
            output.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / m
        }
        LossKind::CrossEntropy => -output
            .iter()
            .zip(target)
            .map(|(y, t)| t * (y + CE_EPSILON).ln())
            .sum::<f64>(),
    }
}

pub fn one_hot(label: usize, classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    v[label] = 1.0;
    v
}

#[inline]
fn one_hot_into(label: usize, out: &mut [f64]) {
    out.fill(0.0);
    out[label] = 1.0;
}

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
