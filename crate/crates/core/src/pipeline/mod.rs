//! End-to-end plumbing: dataset assembly (GMD1), stratified splits, the
//! training loop, evaluation metrics, and single-sequence prediction.

mod dataset;
mod metrics;
mod predict;
mod roc;
mod split;
mod train;

pub use dataset::{
    build_dataset, BuildOptions, BuildStats, Dataset, DatasetManifest, GMD1_MAGIC,
};
pub use metrics::{
    confusion_matrix, evaluate, render_report, write_metrics_json, write_roc_csv, ClassMetrics,
    Evaluation, MetricsReport,
};
pub use predict::{predict_one, PredictionReport};
pub use roc::{roc_curve, RocCurve, RocPoint};
pub use split::{split_indices, SplitIndices};
pub use train::{train, write_history_csv, EpochStats, TrainConfig, TrainOutcome};

use thiserror::Error;

use crate::nn::{CheckpointError, NnError};
use crate::rasterizer::RasterError;
use crate::seqio::{Region, SeqIoError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no metadata entry for {accession}")]
    UnlabeledRecord { accession: String },
    #[error("dataset holds no samples")]
    EmptyDataset,
    #[error("{region} has only {count} sample(s); stratified split needs 2")]
    ClassTooSmall { region: Region, count: usize },
    #[error("class has no positives or no negatives")]
    DegenerateClass,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    SeqIo(#[from] SeqIoError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// SplitMix64 finalizer. Stateless seed derivation below hangs off this so
/// every shuffle/dropout stream is a pure function of (seed, position) —
/// resuming a run from a checkpoint replays identical randomness.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix2(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b)
}

pub fn mix3(a: u64, b: u64, c: u64) -> u64 {
    splitmix64(mix2(a, b) ^ c)
}
