//! GMNN checkpoint format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic    b"GMNN"
//! version  u32 (currently 1)
//! epochs_completed u32
//! best_val_acc     f32
//! spec: input_channels, input_height, input_width,
//!       stem_channels, stem_kernel, stem_stride   (u32 each)
//!       block count u32, then (layers u32, growth u32) per block
//!       compression f64, dropout f64, classes u32
//! tensors: every parameter in visit order (value then RMSProp moment),
//!          then every state tensor, each as raw f32 values
//! ```
//!
//! Tensor lengths are not stored; the architecture determines them, so a
//! load rebuilds the network from the spec and then requires the byte count
//! to match exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::network::{BlockSpec, Network, NetworkSpec};
use super::tensor::{Scalar, Tensor};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"GMNN";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a GMNN checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointMeta {
    pub epochs_completed: u32,
    pub best_val_acc: f32,
    pub spec: NetworkSpec,
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<(), CheckpointError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_usize<W: Write>(w: &mut W, v: usize) -> Result<(), CheckpointError> {
    let v = u32::try_from(v).map_err(|_| CheckpointError::Malformed(format!("{v} exceeds u32")))?;
    put_u32(w, v)
}

fn put_f32<W: Write>(w: &mut W, v: f32) -> Result<(), CheckpointError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> Result<(), CheckpointError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_tensor<S: Scalar, W: Write>(w: &mut W, t: &Tensor<S>) -> Result<(), CheckpointError> {
    let mut buf = Vec::with_capacity(t.len() * 4);
    for &v in t.data() {
        buf.extend_from_slice(&(v.to_f64() as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| CheckpointError::Malformed("truncated".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn get_f32<R: Read>(r: &mut R) -> Result<f32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| CheckpointError::Malformed("truncated".into()))?;
    Ok(f32::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| CheckpointError::Malformed("truncated".into()))?;
    Ok(f64::from_le_bytes(b))
}

fn fill_tensor<S: Scalar, R: Read>(r: &mut R, t: &mut Tensor<S>) -> Result<(), CheckpointError> {
    let mut buf = vec![0u8; t.len() * 4];
    r.read_exact(&mut buf)
        .map_err(|_| CheckpointError::Malformed("truncated tensor data".into()))?;
    for (dst, chunk) in t.data_mut().iter_mut().zip(buf.chunks_exact(4)) {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        *dst = S::from_f64(v as f64);
    }
    Ok(())
}

/// Serialize spec, progress counters, parameters, optimizer moments, and
/// layer state (batchnorm running statistics). Values are stored as f32
/// regardless of the network's scalar type.
pub fn save_checkpoint<S: Scalar>(
    path: &Path,
    net: &mut Network<S>,
    epochs_completed: u32,
    best_val_acc: f32,
) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&CHECKPOINT_MAGIC)?;
    put_u32(&mut w, CHECKPOINT_VERSION)?;
    put_u32(&mut w, epochs_completed)?;
    put_f32(&mut w, best_val_acc)?;

    let spec = net.spec().clone();
    put_usize(&mut w, spec.input_channels)?;
    put_usize(&mut w, spec.input_height)?;
    put_usize(&mut w, spec.input_width)?;
    put_usize(&mut w, spec.stem_channels)?;
    put_usize(&mut w, spec.stem_kernel)?;
    put_usize(&mut w, spec.stem_stride)?;
    put_usize(&mut w, spec.blocks.len())?;
    for b in &spec.blocks {
        put_usize(&mut w, b.layers)?;
        put_usize(&mut w, b.growth)?;
    }
    put_f64(&mut w, spec.compression)?;
    put_f64(&mut w, spec.dropout)?;
    put_usize(&mut w, spec.classes)?;

    let mut result = Ok(());
    net.visit_params(&mut |p| {
        if result.is_ok() {
            result = put_tensor(&mut w, &p.value).and_then(|()| put_tensor(&mut w, &p.moment));
        }
    });
    result?;
    let mut result = Ok(());
    net.visit_state(&mut |t| {
        if result.is_ok() {
            result = put_tensor(&mut w, t);
        }
    });
    result?;
    w.flush()?;
    Ok(())
}

/// Rebuild the network described by the file and overwrite its parameters,
/// moments, and state with the stored tensors. The file must contain exactly
/// the bytes the architecture calls for.
pub fn load_checkpoint<S: Scalar>(
    path: &Path,
) -> Result<(Network<S>, CheckpointMeta), CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| CheckpointError::Malformed("truncated header".into()))?;
    if magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = get_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let epochs_completed = get_u32(&mut r)?;
    let best_val_acc = get_f32(&mut r)?;

    let input_channels = get_u32(&mut r)? as usize;
    let input_height = get_u32(&mut r)? as usize;
    let input_width = get_u32(&mut r)? as usize;
    let stem_channels = get_u32(&mut r)? as usize;
    let stem_kernel = get_u32(&mut r)? as usize;
    let stem_stride = get_u32(&mut r)? as usize;
    let n_blocks = get_u32(&mut r)? as usize;
    if n_blocks > 64 {
        return Err(CheckpointError::Malformed(format!(
            "implausible block count {n_blocks}"
        )));
    }
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let layers = get_u32(&mut r)? as usize;
        let growth = get_u32(&mut r)? as usize;
        blocks.push(BlockSpec { layers, growth });
    }
    let compression = get_f64(&mut r)?;
    let dropout = get_f64(&mut r)?;
    let classes = get_u32(&mut r)? as usize;

    let spec = NetworkSpec {
        input_channels,
        input_height,
        input_width,
        stem_channels,
        stem_kernel,
        stem_stride,
        blocks,
        compression,
        dropout,
        classes,
    };
    let mut net = Network::<S>::init(spec.clone(), 0)
        .map_err(|e| CheckpointError::Malformed(format!("spec rejected: {e}")))?;

    let mut result = Ok(());
    net.visit_params(&mut |p| {
        if result.is_ok() {
            result = fill_tensor(&mut r, &mut p.value)
                .and_then(|()| fill_tensor(&mut r, &mut p.moment));
        }
    });
    result?;
    let mut result = Ok(());
    net.visit_state(&mut |t| {
        if result.is_ok() {
            result = fill_tensor(&mut r, t);
        }
    });
    result?;

    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(CheckpointError::Malformed("trailing bytes".into()));
    }

    Ok((
        net,
        CheckpointMeta {
            epochs_completed,
            best_val_acc,
            spec,
        },
    ))
}
