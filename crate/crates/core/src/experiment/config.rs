//! TOML experiment configuration. Every field except `experiment` has a
//! default, so a one-line file is a valid config.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::PixelAttackStrategy;
use crate::crossbar::QueryMode;
use crate::data::DatasetKind;
use crate::error::{Error, Result};
use crate::model::{ClipPolicy, Pairing, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Table1,
    Fig3Heatmaps,
    Fig4SinglePixel,
    Fig5Surrogate,
    RecoveryCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Table1 => "table1",
            ExperimentKind::Fig3Heatmaps => "fig3_heatmaps",
            ExperimentKind::Fig4SinglePixel => "fig4_single_pixel",
            ExperimentKind::Fig5Surrogate => "fig5_surrogate",
            ExperimentKind::RecoveryCheck => "recovery_check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_dataset")]
    pub dataset: DatasetKind,
    /// Oracle pairing for `fig3_heatmaps` and `fig4_single_pixel`.
    #[serde(default = "default_pairing")]
    pub pairing: Pairing,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    /// Trained oracles are loaded from here when present and saved here
    /// otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_dir: Option<PathBuf>,
    /// Worker threads for independent grid cells.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub train: TrainOverrides,
    #[serde(default)]
    pub data: DataLimits,
    #[serde(default)]
    pub table1: Table1Config,
    #[serde(default)]
    pub fig3: Fig3Config,
    #[serde(default)]
    pub fig4: Fig4Config,
    #[serde(default)]
    pub fig5: Fig5Config,
    #[serde(default)]
    pub recovery: RecoveryConfig,
}

fn default_dataset() -> DatasetKind {
    DatasetKind::Mnist
}

fn default_pairing() -> Pairing {
    Pairing::SoftmaxCe
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_jobs() -> usize {
    1
}

/// Oracle optimiser settings; unset fields take the per-dataset,
/// per-pairing defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
}

impl TrainOverrides {
    pub fn resolve(&self, dataset: DatasetKind, pairing: Pairing, seed: u64) -> TrainConfig {
        let d = TrainConfig::default_for(dataset, pairing, seed);
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            seed,
        }
    }
}

/// Optional seeded subsampling of the loaded splits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataLimits {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Table1Config {
    pub pairings: Vec<Pairing>,
    pub runs: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            pairings: Pairing::ALL.to_vec(),
            runs: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Config {
    pub pairings: Vec<Pairing>,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            pairings: Pairing::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig4Config {
    /// Number of evenly spaced strengths in `[0, epsilon_max]`.
    pub epsilon_count: usize,
    pub epsilon_max: f64,
    pub strategies: Vec<PixelAttackStrategy>,
    pub runs: usize,
    pub n_pixels: Vec<usize>,
    pub clip: ClipPolicy,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            epsilon_count: 21,
            epsilon_max: 1.0,
            strategies: PixelAttackStrategy::ALL.to_vec(),
            runs: 5,
            n_pixels: vec![1],
            clip: ClipPolicy::Clip,
        }
    }
}

/// Power-benefit sweep. The oracle is always `linear_mse`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig5Config {
    pub modes: Vec<QueryMode>,
    pub lambdas: Vec<f64>,
    /// Defaults to a dataset-specific grid straddling the input size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qs: Option<Vec<usize>>,
    pub runs: usize,
    pub epsilon: f64,
    pub clip: ClipPolicy,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Self {
            modes: vec![QueryMode::RawOutput, QueryMode::LabelOnly],
            lambdas: vec![0.0, 1e-4, 1e-3, 1e-2],
            qs: None,
            runs: 10,
            epsilon: 0.1,
            clip: ClipPolicy::Clip,
        }
    }
}

impl Fig5Config {
    pub fn query_grid(&self, dataset: DatasetKind) -> Vec<usize> {
        self.qs.clone().unwrap_or_else(|| default_query_grid(dataset))
    }
}

pub fn default_query_grid(dataset: DatasetKind) -> Vec<usize> {
    match dataset {
        DatasetKind::Mnist => vec![25, 50, 100, 200, 400, 800, 1600],
        DatasetKind::Cifar10 => vec![100, 200, 400, 800, 1600, 3200, 6400],
    }
}

/// Exact-recovery check on a `linear_mse` oracle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoveryConfig {
    /// Defaults to the input size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queries: Option<usize>,
}

impl ExperimentConfig {
    /// Config with every default filled in.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            dataset: default_dataset(),
            pairing: default_pairing(),
            seed: 0,
            output_dir: default_output_dir(),
            data_dir: default_data_dir(),
            model_dir: None,
            jobs: default_jobs(),
            train: TrainOverrides::default(),
            data: DataLimits::default(),
            table1: Table1Config::default(),
            fig3: Fig3Config::default(),
            fig4: Fig4Config::default(),
            fig5: Fig5Config::default(),
            recovery: RecoveryConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Cross-field checks. Paths are checked by `run_experiment`.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if self.jobs == 0 {
            return bad("jobs", "must be at least 1".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed", format!("must be at most {}", i64::MAX));
        }
        let n = self.dataset.feature_dim();
        if self.train.batch_size == Some(0) {
            return bad("train.batch_size", "must be positive".into());
        }
        if let Some(lr) = self.train.learning_rate {
            if !(lr.is_finite() && lr >= 0.0) {
                return bad("train.learning_rate", format!("must be finite and >= 0, got {lr}"));
            }
        }
        if self.data.train_limit == Some(0) {
            return bad("data.train_limit", "must be positive".into());
        }
        if self.data.test_limit == Some(0) {
            return bad("data.test_limit", "must be positive".into());
        }
        match self.experiment {
            ExperimentKind::Table1 => {
                if self.table1.pairings.is_empty() {
                    return bad("table1.pairings", "must not be empty".into());
                }
                if self.table1.runs == 0 {
                    return bad("table1.runs", "must be at least 1".into());
                }
            }
            ExperimentKind::Fig3Heatmaps => {
                if self.fig3.pairings.is_empty() {
                    return bad("fig3.pairings", "must not be empty".into());
                }
            }
            ExperimentKind::Fig4SinglePixel => {
                let f = &self.fig4;
                if f.epsilon_count == 0 {
                    return bad("fig4.epsilon_count", "must be at least 1".into());
                }
                if !(f.epsilon_max.is_finite() && f.epsilon_max >= 0.0) {
                    return bad(
                        "fig4.epsilon_max",
                        format!("must be finite and >= 0, got {}", f.epsilon_max),
                    );
                }
                if f.strategies.is_empty() {
                    return bad("fig4.strategies", "must not be empty".into());
                }
                if f.runs == 0 {
                    return bad("fig4.runs", "must be at least 1".into());
                }
                if f.n_pixels.is_empty() {
                    return bad("fig4.n_pixels", "must not be empty".into());
                }
                if let Some(&k) = f.n_pixels.iter().find(|&&k| k == 0 || k > n) {
                    return bad("fig4.n_pixels", format!("{k} is outside 1..={n}"));
                }
            }
            ExperimentKind::Fig5Surrogate => {
                let f = &self.fig5;
                if !f.lambdas.contains(&0.0) {
                    return bad("fig5.lambdas", "must contain 0 (the no-power baseline)".into());
                }
                if let Some(l) = f.lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
                    return bad("fig5.lambdas", format!("{l} is not finite and >= 0"));
                }
                if f.modes.is_empty() {
                    return bad("fig5.modes", "must not be empty".into());
                }
                if f.runs < 2 {
                    return bad("fig5.runs", "must be at least 2 for the t-test".into());
                }
                if !(f.epsilon.is_finite() && f.epsilon >= 0.0) {
                    return bad("fig5.epsilon", format!("must be finite and >= 0, got {}", f.epsilon));
                }
                let qs = f.query_grid(self.dataset);
                if qs.is_empty() || qs.contains(&0) {
                    return bad("fig5.qs", "must be a non-empty list of positive counts".into());
                }
                if let (Some(limit), Some(&q)) = (self.data.train_limit, qs.iter().max()) {
                    if q > limit {
                        return bad("fig5.qs", format!("{q} queries exceed data.train_limit = {limit}"));
                    }
                }
            }
            ExperimentKind::RecoveryCheck => {
                if self.recovery.queries == Some(0) {
                    return bad("recovery.queries", "must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.data_dir {
            self.data_dir = d.clone();
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub data_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Reads, parses, fills defaults and checks `path`.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml("experiment = \"table1\"\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::new(ExperimentKind::Table1));
        assert_eq!(cfg.table1.runs, 5);
        assert_eq!(cfg.fig5.lambdas, vec![0.0, 1e-4, 1e-3, 1e-2]);
        assert_eq!(cfg.fig4.epsilon_count, 21);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Fig5Surrogate);
        cfg.dataset = DatasetKind::Cifar10;
        cfg.fig5.qs = Some(vec![10, 20]);
        cfg.data.train_limit = Some(100);
        cfg.train.learning_rate = Some(0.5);
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn fig5_requires_zero_lambda() {
        let err = ExperimentConfig::from_toml("experiment = \"fig5_surrogate\"\n[fig5]\nlambdas = [0.001, 0.01]\n")
            .unwrap_err();
        assert!(
            err.to_string().contains("fig5.lambdas") && err.to_string().contains("contain 0"),
            "{err}"
        );
    }

    #[test]
    fn unknown_dataset_lists_options() {
        let err = ExperimentConfig::from_toml("experiment = \"table1\"\ndataset = \"svhn\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mnist") && msg.contains("cifar10"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_fields_and_bad_values_are_rejected() {
        assert!(ExperimentConfig::from_toml("experiment = \"table1\"\nseeed = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"table1\"\njobs = 0\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"fig4_single_pixel\"\n[fig4]\nn_pixels = [785]\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"fig5_surrogate\"\n[fig5]\nruns = 1\n").is_err());
        assert!(ExperimentConfig::from_toml(
            "experiment = \"fig5_surrogate\"\n[data]\ntrain_limit = 100\n[fig5]\nqs = [200]\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"table1\"\n[train]\nbatch_size = 0\n").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Table1);
        cfg.apply_overrides(&Overrides {
            seed: Some(9),
            data_dir: Some("d".into()),
            output_dir: None,
            jobs: Some(3),
        });
        assert_eq!((cfg.seed, cfg.jobs), (9, 3));
        assert_eq!(cfg.data_dir, PathBuf::from("d"));
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn train_overrides_resolve_over_defaults() {
        let o = TrainOverrides {
            epochs: Some(3),
            ..Default::default()
        };
        let c = o.resolve(DatasetKind::Cifar10, Pairing::SoftmaxCe, 4);
        assert_eq!(c.epochs, 3);
        assert_eq!(c.learning_rate, 0.01);
        assert_eq!(c.seed, 4);
    }
}
