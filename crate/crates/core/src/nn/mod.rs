//! From-scratch CNN kernel: tensors, layer forward/backward passes, the
//! densely-connected network assembly, RMSProp, checkpoints, and a
//! finite-difference gradient checker.
//!
//! Everything here is deterministic by construction: accumulation orders are
//! fixed, parallelism only ever splits disjoint output slices, and all
//! randomness flows through explicitly seeded generators. Two runs with the
//! same seeds produce bit-identical results at any thread count.

mod batchnorm;
mod checkpoint;
mod conv;
mod dense;
mod dropout;
mod gradcheck;
mod kernels;
mod layers;
mod network;
mod pool;
mod relu;
mod rmsprop;
mod softmax;
mod tensor;

pub use batchnorm::{batchnorm_backward, batchnorm_eval, batchnorm_train, BnBatchStats};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, CheckpointMeta};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads};
pub use dense::{dense_backward, dense_forward};
pub use dropout::{dropout_backward, dropout_train};
pub use gradcheck::{grad_check, GradCheckReport};
pub use layers::{
    AvgPool2, BatchNorm, Conv2d, Dense, DenseBlock, Dropout, GlobalAvgPool, Layer, Mode, Param,
    Relu, Transition,
};
pub use network::{BlockSpec, Network, NetworkSpec};
pub use pool::{
    avg_pool2_backward, avg_pool2_forward, global_avg_pool_backward, global_avg_pool_forward,
};
pub use relu::{relu_backward, relu_forward};
pub use rmsprop::{rmsprop_step, RmsPropParams};
pub use softmax::{cross_entropy, one_hot, softmax, softmax_cross_entropy};
pub use tensor::{concat_channels, split_channels, Scalar, Tensor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("batch of {0} cannot provide batch statistics (need ≥ 2)")]
    DegenerateBatch(usize),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
}
