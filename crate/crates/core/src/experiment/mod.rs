//! Config-driven experiment runs that write CSV/JSON artifacts and a
//! manifest.

mod config;
mod manifest;
mod runner;

pub use config::{
    default_query_grid, validate_config, DataLimits, ExperimentConfig, ExperimentKind, Fig3Config, Fig4Config,
    Fig5Config, Overrides, RecoveryConfig, Table1Config, TrainOverrides,
};
pub use manifest::{ArtifactEntry, RunManifest, SeedEntry, StageTiming, MANIFEST_FILE};
pub use runner::{heatmap_layout, model_file_name, oracle_seed_label, run_experiment};
