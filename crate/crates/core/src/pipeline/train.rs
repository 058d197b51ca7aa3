//! Training loop: stratified validation split, RMSProp updates, per-epoch
//! history, checkpointing.
//!
//! Every random choice — init, split membership, epoch shuffles, dropout
//! masks — is a pure function of `TrainConfig::seed` and the loop position,
//! so a run resumed from a snapshot replays the exact arithmetic of an
//! uninterrupted one.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::split::split_indices;
use super::{mix2, mix3, PipelineError};
use crate::nn::{
    load_checkpoint, one_hot, save_checkpoint, softmax_cross_entropy, Mode, Network, NetworkSpec,
    NnError, RmsPropParams, Scalar, Tensor,
};
use crate::seqio::Region;

// Domain tags keep the derived seed streams for unrelated purposes apart.
const TAG_INIT: u64 = 0x696e_6974;
const TAG_SPLIT: u64 = 0x7370_6c69_74;
const TAG_SHUFFLE: u64 = 0x7368_7566_66;
const TAG_DROPOUT: u64 = 0x6472_6f70;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub validation_fraction: f64,
    /// Best-so-far model, written on strict validation-accuracy improvement.
    pub checkpoint_path: Option<PathBuf>,
    /// Last-epoch state, overwritten every epoch; the resume point.
    pub snapshot_path: Option<PathBuf>,
}

impl TrainConfig {
    /// Seed that [`train`] feeds to [`split_indices`]; callers reproduce the
    /// exact holdout with `split_indices(labels, validation_fraction, seed)`.
    pub fn split_seed(&self) -> u64 {
        mix2(self.seed, TAG_SPLIT)
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            learning_rate: 0.001,
            decay: 0.9,
            epsilon: 1e-8,
            seed: 0,
            validation_fraction: 0.2,
            checkpoint_path: None,
            snapshot_path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

pub struct TrainOutcome<S: Scalar> {
    pub network: Network<S>,
    /// One row per epoch run in this call (a resumed run starts mid-count).
    pub history: Vec<EpochStats>,
    pub best_val_acc: f32,
    pub best_epoch: Option<u32>,
}

fn argmax_rows<S: Scalar>(logits: &Tensor<S>, classes: usize) -> Vec<usize> {
    logits
        .data()
        .chunks_exact(classes)
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Mean loss and accuracy over `indices`, eval mode, batched.
fn eval_pass<S: Scalar>(
    net: &mut Network<S>,
    dataset: &Dataset,
    indices: &[usize],
    batch_size: usize,
) -> Result<(f64, f64), PipelineError> {
    let classes = net.spec().classes;
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for chunk in indices.chunks(batch_size) {
        let x = dataset.batch_tensor::<S>(chunk);
        let labels: Vec<usize> = chunk.iter().map(|&i| dataset.labels[i] as usize).collect();
        let logits = net.forward(&x, Mode::Eval)?;
        let targets = one_hot::<S>(&labels, classes)?;
        let (loss, _) = softmax_cross_entropy(&logits, &targets)?;
        loss_sum += loss.to_f64() * chunk.len() as f64;
        correct += argmax_rows(&logits, classes)
            .iter()
            .zip(&labels)
            .filter(|(p, t)| p == t)
            .count();
    }
    let n = indices.len() as f64;
    Ok((loss_sum / n, correct as f64 / n))
}

fn check_config(dataset: &Dataset, spec: &NetworkSpec, cfg: &TrainConfig) -> Result<(), PipelineError> {
    if dataset.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    if cfg.batch_size < 2 {
        return Err(PipelineError::Format(
            "batch size below 2 starves batch normalization".into(),
        ));
    }
    if cfg.epochs == 0 {
        return Err(PipelineError::Format("zero epochs".into()));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(PipelineError::Format(format!(
            "learning rate {}",
            cfg.learning_rate
        )));
    }
    if !(0.0..1.0).contains(&cfg.decay) {
        return Err(PipelineError::Format(format!("decay {}", cfg.decay)));
    }
    let want = (
        dataset.channels as usize,
        dataset.height as usize,
        dataset.width as usize,
    );
    let got = (spec.input_channels, spec.input_height, spec.input_width);
    if want != got {
        return Err(PipelineError::Format(format!(
            "dataset is {want:?}, network expects {got:?}"
        )));
    }
    if spec.classes != Region::COUNT {
        return Err(PipelineError::Format(format!(
            "classifier must emit {} regions, spec says {}",
            Region::COUNT,
            spec.classes
        )));
    }
    Ok(())
}

/// Train `spec` on `dataset` under `cfg`; with `resume_from`, continue a run
/// saved by `snapshot_path` (or any checkpoint) up to `cfg.epochs` total.
pub fn train<S: Scalar>(
    dataset: &Dataset,
    spec: NetworkSpec,
    cfg: &TrainConfig,
    resume_from: Option<&Path>,
) -> Result<TrainOutcome<S>, PipelineError> {
    check_config(dataset, &spec, cfg)?;

    let split = split_indices(&dataset.labels, cfg.validation_fraction, cfg.split_seed())?;

    let (mut net, start_epoch, mut best_val_acc) = match resume_from {
        Some(path) => {
            let (net, meta) = load_checkpoint::<S>(path)?;
            if meta.spec != spec {
                return Err(PipelineError::Format(
                    "checkpoint architecture differs from the requested spec".into(),
                ));
            }
            if meta.epochs_completed as usize >= cfg.epochs {
                return Err(PipelineError::Format(format!(
                    "checkpoint already covers {} epoch(s), asked for {}",
                    meta.epochs_completed, cfg.epochs
                )));
            }
            (net, meta.epochs_completed as usize, meta.best_val_acc)
        }
        None => (
            Network::init(spec, mix2(cfg.seed, TAG_INIT))?,
            0,
            f32::NEG_INFINITY,
        ),
    };

    let rms = RmsPropParams {
        learning_rate: cfg.learning_rate,
        decay: cfg.decay,
        epsilon: cfg.epsilon,
    };
    let classes = net.spec().classes;
    let dropout_base = mix2(cfg.seed, TAG_DROPOUT);

    let mut history = Vec::with_capacity(cfg.epochs - start_epoch);
    let mut best_epoch = None;

    for e in start_epoch..cfg.epochs {
        let mut order = split.train.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(mix3(cfg.seed, TAG_SHUFFLE, e as u64));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut seen = 0usize;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            if chunk.len() == 1 {
                // A singleton batch has no batch statistics; skip it rather
                // than abort the epoch.
                continue;
            }
            net.reseed(mix3(dropout_base, e as u64, b as u64));
            let x = dataset.batch_tensor::<S>(chunk);
            let labels: Vec<usize> =
                chunk.iter().map(|&i| dataset.labels[i] as usize).collect();

            let blowup = |err: NnError| match err {
                NnError::NonFinite(_) => PipelineError::NonFiniteLoss {
                    epoch: e + 1,
                    batch: b,
                },
                other => PipelineError::Nn(other),
            };
            let logits = net.forward(&x, Mode::Train).map_err(blowup)?;
            let targets = one_hot::<S>(&labels, classes)?;
            let (loss, grad) = softmax_cross_entropy(&logits, &targets).map_err(blowup)?;
            let loss = loss.to_f64();
            if !loss.is_finite() {
                return Err(PipelineError::NonFiniteLoss {
                    epoch: e + 1,
                    batch: b,
                });
            }

            loss_sum += loss * chunk.len() as f64;
            correct += argmax_rows(&logits, classes)
                .iter()
                .zip(&labels)
                .filter(|(p, t)| p == t)
                .count();
            seen += chunk.len();

            net.zero_grads();
            net.backward(&grad)?;
            net.apply_gradients(&rms)?;
        }

        let (val_loss, val_acc) = eval_pass(&mut net, dataset, &split.holdout, cfg.batch_size)?;
        history.push(EpochStats {
            epoch: e + 1,
            train_loss: if seen == 0 { 0.0 } else { loss_sum / seen as f64 },
            train_acc: if seen == 0 { 0.0 } else { correct as f64 / seen as f64 },
            val_loss,
            val_acc,
        });

        if val_acc as f32 > best_val_acc {
            best_val_acc = val_acc as f32;
            best_epoch = Some(e as u32 + 1);
            if let Some(path) = &cfg.checkpoint_path {
                save_checkpoint(path, &mut net, e as u32 + 1, best_val_acc)?;
            }
        }
        if let Some(path) = &cfg.snapshot_path {
            save_checkpoint(path, &mut net, e as u32 + 1, best_val_acc)?;
        }
    }

    Ok(TrainOutcome {
        network: net,
        history,
        best_val_acc,
        best_epoch,
    })
}

/// `epoch,train_loss,train_acc,val_loss,val_acc`, floats in their shortest
/// round-trip form so identical runs produce identical bytes.
pub fn write_history_csv(path: &Path, history: &[EpochStats]) -> Result<(), PipelineError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "epoch,train_loss,train_acc,val_loss,val_acc")?;
    for row in history {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.epoch, row.train_loss, row.train_acc, row.val_loss, row.val_acc
        )?;
    }
    w.flush()?;
    Ok(())
}
