//! Single-layer networks on ideal NVM crossbars: training, crossbar
//! compilation, power side-channel extraction, and evasion attacks that
//! exploit the leaked column norms.

pub mod attacks;
pub mod crossbar;
pub mod data;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sidechannel;
pub mod stats;
pub mod surrogate;

pub use attacks::{AttackContext, AttackCurve, PixelAttackStrategy};
pub use crossbar::{CrossbarInstance, PowerNoise, QueryMode, QueryRecord, QueryResponse};
pub use data::{DatasetKind, LabeledDataset, Split};
pub use error::{Error, ErrorCategory, Result};
pub use experiment::{run_experiment, validate_config, ExperimentConfig, RunManifest};
pub use linalg::Matrix;
pub use model::{Activation, ClipPolicy, LinearLayerModel, LossKind, Pairing, TrainConfig};
pub use sidechannel::{ColumnNormProfile, CorrelationReport};
pub use surrogate::{SurrogateConfig, TransferResult};
