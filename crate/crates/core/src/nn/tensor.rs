//! Flat tensor storage and the scalar abstraction over f32/f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssign};

use super::NnError;

/// Element type for all network math. The two implementations are f32
/// (training default) and f64 (gradient checking, oracles).
pub trait Scalar:
    Float + NumAssign + Sum + Send + Sync + Debug + Display + Default + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline(always)]
    fn from_f64(v: f64) -> f32 {
        v as f32
    }

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline(always)]
    fn from_f64(v: f64) -> f64 {
        v
    }

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Dense row-major tensor. Shape is dynamic; layout is always contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![S::zero(); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<S>) -> Result<Self, NnError> {
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(NnError::ShapeMismatch(format!(
                "{} elements for shape {shape:?} (need {expect})",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn from_f64_slice(shape: &[usize], data: &[f64]) -> Result<Self, NnError> {
        Tensor::from_vec(shape, data.iter().map(|&v| S::from_f64(v)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self, NnError> {
        let expect: usize = shape.iter().product();
        if expect != self.data.len() {
            return Err(NnError::ShapeMismatch(format!(
                "cannot view {:?} as {shape:?}",
                self.shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Interpret as (N, C, H, W).
    pub fn dims4(&self) -> Result<(usize, usize, usize, usize), NnError> {
        match *self.shape {
            [n, c, h, w] => Ok((n, c, h, w)),
            _ => Err(NnError::ShapeMismatch(format!(
                "expected 4-d tensor, got {:?}",
                self.shape
            ))),
        }
    }

    /// Interpret as (N, F).
    pub fn dims2(&self) -> Result<(usize, usize), NnError> {
        match *self.shape {
            [n, f] => Ok((n, f)),
            _ => Err(NnError::ShapeMismatch(format!(
                "expected 2-d tensor, got {:?}",
                self.shape
            ))),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise accumulate: self += other.
    pub fn add_assign(&mut self, other: &Tensor<S>) -> Result<(), NnError> {
        if self.shape != other.shape {
            return Err(NnError::ShapeMismatch(format!(
                "add {:?} to {:?}",
                other.shape, self.shape
            )));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }
}

/// Concatenate two NCHW tensors along the channel axis.
pub fn concat_channels<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Result<Tensor<S>, NnError> {
    let (n, ca, h, w) = a.dims4()?;
    let (nb, cb, hb, wb) = b.dims4()?;
    if (n, h, w) != (nb, hb, wb) {
        return Err(NnError::ShapeMismatch(format!(
            "concat {:?} with {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let plane = h * w;
    let mut out = Tensor::zeros(&[n, ca + cb, h, w]);
    let dst = out.data_mut();
    for i in 0..n {
        let dst_base = i * (ca + cb) * plane;
        dst[dst_base..dst_base + ca * plane]
            .copy_from_slice(&a.data()[i * ca * plane..(i + 1) * ca * plane]);
        dst[dst_base + ca * plane..dst_base + (ca + cb) * plane]
            .copy_from_slice(&b.data()[i * cb * plane..(i + 1) * cb * plane]);
    }
    Ok(out)
}

/// Split an NCHW tensor into its first `c_first` channels and the rest.
pub fn split_channels<S: Scalar>(
    t: &Tensor<S>,
    c_first: usize,
) -> Result<(Tensor<S>, Tensor<S>), NnError> {
    let (n, c, h, w) = t.dims4()?;
    if c_first >= c {
        return Err(NnError::ShapeMismatch(format!(
            "split at channel {c_first} of {c}"
        )));
    }
    let c_rest = c - c_first;
    let plane = h * w;
    let mut first = Tensor::zeros(&[n, c_first, h, w]);
    let mut rest = Tensor::zeros(&[n, c_rest, h, w]);
    for i in 0..n {
        let src = &t.data()[i * c * plane..(i + 1) * c * plane];
        first.data_mut()[i * c_first * plane..(i + 1) * c_first * plane]
            .copy_from_slice(&src[..c_first * plane]);
        rest.data_mut()[i * c_rest * plane..(i + 1) * c_rest * plane]
            .copy_from_slice(&src[c_first * plane..]);
    }
    Ok((first, rest))
}
