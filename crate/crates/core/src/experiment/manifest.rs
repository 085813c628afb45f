use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::rng;

pub const MANIFEST_FILE: &str = "manifest.json";

/// One emitted file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub bytes: u64,
    /// Column meanings, for readers of the file.
    pub columns: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// A derived seed and the label it was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub label: String,
    pub seed: u64,
}

/// Record of one experiment run. Written after every other artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    /// `derived = splitmix64(master ^ fnv1a64(label))`.
    pub seed_function: String,
    pub master_seed: u64,
    pub seeds: Vec<SeedEntry>,
    pub files: Vec<ArtifactEntry>,
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Serialize(format!("{}: {e}", path.display())))
    }
}

/// Collects files, timings and seeds while an experiment runs.
#[derive(Debug)]
pub(crate) struct RunRecorder {
    out: PathBuf,
    master: u64,
    seeds: Vec<SeedEntry>,
    files: Vec<ArtifactEntry>,
    timings: Vec<StageTiming>,
}

impl RunRecorder {
    pub(crate) fn new(out: &Path, master: u64) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Self {
            out: out.to_path_buf(),
            master,
            seeds: Vec::new(),
            files: Vec::new(),
            timings: Vec::new(),
        })
    }

    /// Derives and records the seed for `label`.
    pub(crate) fn seed(&mut self, label: &str) -> u64 {
        let seed = rng::derive_seed(self.master, label);
        if !self.seeds.iter().any(|s| s.label == label) {
            self.seeds.push(SeedEntry {
                label: label.to_string(),
                seed,
            });
        }
        seed
    }

    pub(crate) fn write(&mut self, file: &str, contents: &str, columns: &str) -> Result<()> {
        let path = self.out.join(file);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        log::info!("wrote {}", path.display());
        self.files.push(ArtifactEntry {
            file: file.to_string(),
            bytes: contents.len() as u64,
            columns: columns.to_string(),
        });
        Ok(())
    }

    pub(crate) fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let r = f(self)?;
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(r)
    }

    pub(crate) fn finish(self, config: &ExperimentConfig) -> Result<RunManifest> {
        let manifest = RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seed_function: "splitmix64(master ^ fnv1a64(label))".to_string(),
            master_seed: self.master,
            seeds: self.seeds,
            files: self.files,
            timings: self.timings,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Serialize(e.to_string()))?;
        let path = self.out.join(MANIFEST_FILE);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}
