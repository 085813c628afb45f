//! Ideal NVM crossbar.
//!
//! Each weight is stored as a differential pair of non-negative conductances,
//! `w = g+ - g-`, with the unused device of every pair at zero. All
//! quantities are normalised, so conductances equal weight magnitudes and the
//! supply voltage defaults to 1.
//!
//! The steady-state supply current is
//!
//! ```text
//! i_total = sum_j u_j * G_j,   G_j = sum_i (g+_ij + g-_ij) = sum_i |w_ij|
//! ```
//!
//! which is what an attacker measuring power observes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_tiebreak_low, Matrix};
use crate::model::{activate, Activation, LinearLayerModel};
use crate::rng;

pub const DEFAULT_VDD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    RawOutput,
    LabelOnly,
}

impl QueryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::RawOutput => "raw_output",
            QueryMode::LabelOnly => "label_only",
        }
    }
}

/// What the oracle reveals about its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryResponse {
    Output(Vec<f64>),
    Label(usize),
}

/// One attacker-visible observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub input: Vec<f64>,
    pub response: QueryResponse,
    /// Supply current, present only if requested.
    pub power: Option<f64>,
}

impl QueryRecord {
    pub fn output(&self) -> Option<&[f64]> {
        match &self.response {
            QueryResponse::Output(y) => Some(y),
            QueryResponse::Label(_) => None,
        }
    }

    pub fn label(&self) -> Option<usize> {
        match self.response {
            QueryResponse::Label(l) => Some(l),
            QueryResponse::Output(_) => None,
        }
    }
}

/// Additive Gaussian noise on power readings. Off (`sigma = 0`) by default.
///
/// The noise realisation is a pure function of `seed` and the input bits, so
/// repeated measurements of the same input agree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerNoise {
    pub sigma: f64,
    pub seed: u64,
}

/// A weight matrix programmed into an ideal crossbar.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarInstance {
    g_plus: Matrix,
    g_minus: Matrix,
    /// `g_plus - g_minus`, cached for the forward pass.
    conductance: Matrix,
    /// `G_j`: total conductance attached to input line `j`.
    line_conductance: Vec<f64>,
    vdd: f64,
    activation: Activation,
    noise: PowerNoise,
}

impl CrossbarInstance {
    /// Maps `w >= 0` to `(g+, g-) = (w, 0)` and `w < 0` to `(0, -w)`.
    pub fn compile(model: &LinearLayerModel) -> Result<Self> {
        Self::compile_with_vdd(model, DEFAULT_VDD)
    }

    pub fn compile_with_vdd(model: &LinearLayerModel, vdd: f64) -> Result<Self> {
        let w = model.weights();
        if !w.is_finite() {
            return Err(Error::NonFinite("crossbar weights"));
        }
        if !(vdd > 0.0 && vdd.is_finite()) {
            return Err(Error::InvalidArgument(format!("vdd must be positive, got {vdd}")));
        }
        let (m, n) = w.shape();
        let mut g_plus = Matrix::zeros(m, n);
        let mut g_minus = Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let v = w.get(i, j);
                if v >= 0.0 {
                    g_plus.set(i, j, v);
                } else {
                    g_minus.set(i, j, -v);
                }
            }
        }
        let conductance = g_plus.sub(&g_minus)?;
        let mut line_conductance = vec![0.0; n];
        for i in 0..m {
            for ((acc, p), q) in line_conductance.iter_mut().zip(g_plus.row(i)).zip(g_minus.row(i)) {
                *acc += p + q;
            }
        }
        Ok(Self {
            g_plus,
            g_minus,
            conductance,
            line_conductance,
            vdd,
            activation: model.activation(),
            noise: PowerNoise::default(),
        })
    }

    pub fn with_power_noise(mut self, noise: PowerNoise) -> Self {
        self.noise = noise;
        self
    }

    pub fn g_plus(&self) -> &Matrix {
        &self.g_plus
    }

    pub fn g_minus(&self) -> &Matrix {
        &self.g_minus
    }

    /// The signed weight matrix the crossbar realises.
    pub fn effective_weights(&self) -> &Matrix {
        &self.conductance
    }

    pub fn vdd(&self) -> f64 {
        self.vdd
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inputs(&self) -> usize {
        self.conductance.cols()
    }

    pub fn outputs(&self) -> usize {
        self.conductance.rows()
    }

    fn check_voltages(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.inputs() {
            return Err(Error::DimensionMismatch {
                op: "crossbar input",
                left: self.conductance.shape(),
                right: (u.len(), 1),
            });
        }
        for (index, &value) in u.iter().enumerate() {
            if !(0.0..=self.vdd).contains(&value) {
                return Err(Error::VoltageOutOfRange {
                    index,
                    value,
                    vdd: self.vdd,
                });
            }
        }
        Ok(())
    }

    /// `f((g+ - g-) u)`.
    pub fn forward(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_voltages(u)?;
        Ok(self.forward_unbounded(u))
    }

    /// Forward pass without the voltage-range check. Used only to evaluate
    /// unclipped adversarial inputs, which an idealised array with an
    /// unbounded input range would accept.
    pub fn forward_unbounded(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.inputs());
        let mut s = vec![0.0; self.outputs()];
        self.conductance.matvec_into(u, &mut s);
        activate(self.activation, &s)
    }

    pub fn label(&self, u: &[f64]) -> Result<usize> {
        argmax_tiebreak_low(&self.forward(u)?)
    }

    pub fn label_unbounded(&self, u: &[f64]) -> usize {
        argmax_tiebreak_low(&self.forward_unbounded(u)).expect("crossbar has outputs")
    }

    /// Ideal steady-state supply current, `sum_j u_j G_j`.
    pub fn total_current(&self, u: &[f64]) -> Result<f64> {
        self.check_voltages(u)?;
        Ok(self.ideal_current(u))
    }

    fn ideal_current(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.line_conductance).map(|(v, g)| v * g).sum()
    }

    /// What a power measurement returns: the ideal current plus the optional
    /// noise term.
    pub fn measure_power(&self, u: &[f64]) -> Result<f64> {
        let ideal = self.total_current(u)?;
        if self.noise.sigma == 0.0 {
            return Ok(ideal);
        }
        let h = u
            .iter()
            .fold(self.noise.seed, |acc, v| rng::splitmix64(acc ^ v.to_bits()));
        let a = (rng::splitmix64(h) >> 11) as f64 / (1u64 << 53) as f64;
        let b = (rng::splitmix64(h ^ 0x5555_5555) >> 11) as f64 / (1u64 << 53) as f64;
        let gauss = (-2.0 * (1.0 - a).ln()).sqrt() * (2.0 * std::f64::consts::PI * b).cos();
        Ok(ideal + self.noise.sigma * gauss)
    }

    /// Answers an attacker query.
    pub fn oracle_query(&self, u: &[f64], mode: QueryMode, with_power: bool) -> Result<QueryRecord> {
        let y = self.forward(u)?;
        let response = match mode {
            QueryMode::RawOutput => QueryResponse::Output(y),
            QueryMode::LabelOnly => QueryResponse::Label(argmax_tiebreak_low(&y)?),
        };
        let power = if with_power { Some(self.measure_power(u)?) } else { None };
        Ok(QueryRecord {
            input: u.to_vec(),
            response,
            power,
        })
    }
}
