//! genomotif-core — encode viral RNA sequences as circular color-motif
//! images, filter them with the SUSAN edge detector, and classify them by
//! geographic region with a small densely-connected CNN.
//!
//! The pipeline stages are:
//!
//! 1. **seqio** – FASTA parsing, metadata labels, quality gates.
//! 2. **rasterizer** – midpoint-circle motif images (200×200 RGB by default).
//! 3. **susan** – grayscale conversion and SUSAN edge response.
//! 4. **nn** – deterministic tensor/layer kernel: convolution, batch norm,
//!    pooling, dense blocks, transitions, softmax/cross-entropy, RMSProp.
//! 5. **pipeline** – dataset assembly, stratified splits, training loop,
//!    confusion/precision/recall/F1 and ROC/AUC metrics, prediction reports.

pub mod nn;
pub mod pipeline;
pub mod rasterizer;
pub mod seqio;
pub mod susan;

pub use pipeline::{Dataset, MetricsReport, PredictionReport, TrainConfig};
pub use rasterizer::{FillMode, MotifGeometry, MotifImage, Rgb};
pub use seqio::{QualityConfig, Region, SequenceRecord};
pub use susan::{FilteredImage, GrayImage, SusanParams};
