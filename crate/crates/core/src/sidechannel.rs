//! Attacker-side extraction of weight-column 1-norms from power readings,
//! and how well those norms track the loss sensitivity of each input.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crossbar::{CrossbarInstance, QueryMode};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{argmax_tiebreak_low, top_n_indices};
use crate::model::{one_hot, LinearLayerModel};
use crate::stats::pearson;

/// Column conductances `G_j` recovered from power probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnNormProfile {
    pub norms: Vec<f64>,
    pub probe_count: usize,
}

impl ColumnNormProfile {
    /// Input with the largest 1-norm (lowest index on ties).
    pub fn argmax(&self) -> usize {
        argmax_tiebreak_low(&self.norms).expect("profile is non-empty")
    }

    /// The `n` inputs with the largest 1-norms, largest first.
    pub fn top(&self, n: usize) -> Vec<usize> {
        top_n_indices(&self.norms, n)
    }
}

/// Drives each input line alone at `vdd` and reads `G_j = i_total / vdd`.
/// Uses exactly one label-only power query per input.
pub fn extract_column_norms(oracle: &CrossbarInstance) -> Result<ColumnNormProfile> {
    let n = oracle.inputs();
    let vdd = oracle.vdd();
    let mut probe = vec![0.0; n];
    let mut norms = Vec::with_capacity(n);
    for j in 0..n {
        probe[j] = vdd;
        let rec = oracle.oracle_query(&probe, QueryMode::LabelOnly, true)?;
        let power = rec.power.expect("power requested");
        norms.push((power / vdd).max(0.0));
        probe[j] = 0.0;
    }
    Ok(ColumnNormProfile { norms, probe_count: n })
}

/// Per-feature mean of `|dL/du_j|` over the dataset (true labels as
/// targets).
pub fn sensitivity_heatmap(model: &LinearLayerModel, ds: &LabeledDataset) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; model.inputs()];
    if ds.is_empty() {
        return Ok(acc);
    }
    for i in 0..ds.len() {
        let g = model.input_sensitivity(ds.input(i), &one_hot(ds.label(i), model.outputs()))?;
        for (a, v) in acc.iter_mut().zip(&g) {
            *a += v.abs();
        }
    }
    let inv = 1.0 / ds.len() as f64;
    acc.iter_mut().for_each(|v| *v *= inv);
    Ok(acc)
}

/// Correlations for one trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunCorrelation {
    /// Mean over samples of `pearson(|dL/du|, norms)`.
    pub mean_correlation: f64,
    /// `pearson(mean |dL/du|, norms)`.
    pub correlation_of_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub mean_correlation: f64,
    pub correlation_of_mean: f64,
    pub runs: Vec<RunCorrelation>,
}

/// Correlation between each model's extracted column norms and its input
/// sensitivities on `ds`, averaged over models.
pub fn correlation_study(models: &[LinearLayerModel], ds: &LabeledDataset) -> Result<CorrelationReport> {
    let first = models.first().ok_or(Error::Empty("correlation_study"))?;
    if ds.is_empty() {
        return Err(Error::Empty("correlation_study dataset"));
    }
    let mut runs = Vec::with_capacity(models.len());
    for m in models {
        if m.weights().shape() != first.weights().shape() {
            return Err(Error::DimensionMismatch {
                op: "correlation_study",
                left: first.weights().shape(),
                right: m.weights().shape(),
            });
        }
        runs.push(run_correlation(m, ds)?);
    }
    let r = runs.len() as f64;
    Ok(CorrelationReport {
        mean_correlation: runs.iter().map(|c| c.mean_correlation).sum::<f64>() / r,
        correlation_of_mean: runs.iter().map(|c| c.correlation_of_mean).sum::<f64>() / r,
        runs,
    })
}

pub fn run_correlation(model: &LinearLayerModel, ds: &LabeledDataset) -> Result<RunCorrelation> {
    let oracle = CrossbarInstance::compile(model)?;
    let norms = extract_column_norms(&oracle)?.norms;
    let mut heat = vec![0.0; model.inputs()];
    let mut corr_sum = 0.0;
    let mut abs_g = vec![0.0; model.inputs()];
    for i in 0..ds.len() {
        let g = model.input_sensitivity(ds.input(i), &one_hot(ds.label(i), model.outputs()))?;
        for ((a, h), v) in abs_g.iter_mut().zip(heat.iter_mut()).zip(&g) {
            *a = v.abs();
            *h += *a;
        }
        corr_sum += pearson(&abs_g, &norms)?;
    }
    let n = ds.len() as f64;
    heat.iter_mut().for_each(|v| *v /= n);
    Ok(RunCorrelation {
        mean_correlation: corr_sum / n,
        correlation_of_mean: pearson(&heat, &norms)?,
    })
}

/// Renders `map` as an `h x w` CSV grid: row-major, no header, 17
/// significant digits.
pub fn heatmap_csv(map: &[f64], layout: (usize, usize)) -> Result<String> {
    let (h, w) = layout;
    if h * w != map.len() {
        return Err(Error::DimensionMismatch {
            op: "heatmap layout",
            left: (h, w),
            right: (map.len(), 1),
        });
    }
    let mut out = String::with_capacity(map.len() * 24);
    for row in map.chunks(w) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn export_heatmap_csv(map: &[f64], layout: (usize, usize), path: &Path) -> Result<()> {
    let text = heatmap_csv(map, layout)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
