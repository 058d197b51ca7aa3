//! Batch normalization over NCHW activations, per channel.

use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Per-channel batch statistics captured by the training forward pass;
/// the backward pass and the running-average update both consume them.
#[derive(Clone, Debug)]
pub struct BnBatchStats<S> {
    pub mean: Vec<S>,
    /// Biased variance (divide by the element count, not count − 1).
    pub var: Vec<S>,
}

fn check_affine<S: Scalar>(c: usize, gamma: &[S], beta: &[S]) -> Result<(), NnError> {
    if gamma.len() != c || beta.len() != c {
        return Err(NnError::ShapeMismatch(format!(
            "batchnorm affine lengths ({}, {}) for {c} channels",
            gamma.len(),
            beta.len()
        )));
    }
    Ok(())
}

/// Training-mode forward: normalize with this batch's statistics.
/// Requires at least two samples.
pub fn batchnorm_train<S: Scalar>(
    input: &Tensor<S>,
    gamma: &[S],
    beta: &[S],
    eps: f64,
) -> Result<(Tensor<S>, BnBatchStats<S>), NnError> {
    let (n, c, h, w) = input.dims4()?;
    check_affine(c, gamma, beta)?;
    if n < 2 {
        return Err(NnError::DegenerateBatch(n));
    }
    let plane = h * w;
    let m = S::from_f64((n * plane) as f64);
    let eps = S::from_f64(eps);

    let mut out = Tensor::zeros(input.shape());
    let mut mean = vec![S::zero(); c];
    let mut var = vec![S::zero(); c];

    for ch in 0..c {
        let mut sum = S::zero();
        for s in 0..n {
            let base = (s * c + ch) * plane;
            for &v in &input.data()[base..base + plane] {
                sum += v;
            }
        }
        let mu = sum / m;

        let mut sq = S::zero();
        for s in 0..n {
            let base = (s * c + ch) * plane;
            for &v in &input.data()[base..base + plane] {
                let d = v - mu;
                sq += d * d;
            }
        }
        let sigma2 = sq / m;
        let inv = (sigma2 + eps).sqrt().recip();

        for s in 0..n {
            let base = (s * c + ch) * plane;
            let (src, dst) = (
                &input.data()[base..base + plane],
                &mut out.data_mut()[base..base + plane],
            );
            for (o, &v) in dst.iter_mut().zip(src) {
                *o = gamma[ch] * ((v - mu) * inv) + beta[ch];
            }
        }
        mean[ch] = mu;
        var[ch] = sigma2;
    }
    Ok((out, BnBatchStats { mean, var }))
}

/// Inference-mode forward: normalize with running statistics. Works for any
/// batch size.
pub fn batchnorm_eval<S: Scalar>(
    input: &Tensor<S>,
    gamma: &[S],
    beta: &[S],
    running_mean: &[S],
    running_var: &[S],
    eps: f64,
) -> Result<Tensor<S>, NnError> {
    let (n, c, h, w) = input.dims4()?;
    check_affine(c, gamma, beta)?;
    check_affine(c, running_mean, running_var)?;
    let plane = h * w;
    let eps = S::from_f64(eps);

    let mut out = Tensor::zeros(input.shape());
    for ch in 0..c {
        let inv = (running_var[ch] + eps).sqrt().recip();
        let (mu, g, b) = (running_mean[ch], gamma[ch], beta[ch]);
        for s in 0..n {
            let base = (s * c + ch) * plane;
            let (src, dst) = (
                &input.data()[base..base + plane],
                &mut out.data_mut()[base..base + plane],
            );
            for (o, &v) in dst.iter_mut().zip(src) {
                *o = g * ((v - mu) * inv) + b;
            }
        }
    }
    Ok(out)
}

/// Backward through the training-mode normalization:
/// dx = γ·inv·(dy − mean(dy) − x̂·mean(dy·x̂)), dγ = Σ dy·x̂, dβ = Σ dy.
pub fn batchnorm_backward<S: Scalar>(
    input: &Tensor<S>,
    gamma: &[S],
    stats: &BnBatchStats<S>,
    eps: f64,
    grad_out: &Tensor<S>,
) -> Result<(Tensor<S>, Vec<S>, Vec<S>), NnError> {
    let (n, c, h, w) = input.dims4()?;
    if grad_out.shape() != input.shape() {
        return Err(NnError::ShapeMismatch(format!(
            "batchnorm upstream grad {:?} vs input {:?}",
            grad_out.shape(),
            input.shape()
        )));
    }
    check_affine(c, gamma, &stats.mean)?;
    let plane = h * w;
    let count = n * plane;
    let m = S::from_f64(count as f64);
    let eps = S::from_f64(eps);

    let mut d_input = Tensor::zeros(input.shape());
    let mut d_gamma = vec![S::zero(); c];
    let mut d_beta = vec![S::zero(); c];

    for ch in 0..c {
        let mu = stats.mean[ch];
        let inv = (stats.var[ch] + eps).sqrt().recip();

        let mut sum_dy = S::zero();
        let mut sum_dy_xhat = S::zero();
        for s in 0..n {
            let base = (s * c + ch) * plane;
            let x = &input.data()[base..base + plane];
            let g = &grad_out.data()[base..base + plane];
            for (&xv, &gv) in x.iter().zip(g) {
                sum_dy += gv;
                sum_dy_xhat += gv * ((xv - mu) * inv);
            }
        }
        d_beta[ch] = sum_dy;
        d_gamma[ch] = sum_dy_xhat;

        let mean_dy = sum_dy / m;
        let mean_dy_xhat = sum_dy_xhat / m;
        let scale = gamma[ch] * inv;
        for s in 0..n {
            let base = (s * c + ch) * plane;
            let x = &input.data()[base..base + plane];
            let g = &grad_out.data()[base..base + plane];
            let d = &mut d_input.data_mut()[base..base + plane];
            for ((dv, &xv), &gv) in d.iter_mut().zip(x).zip(g) {
                let xhat = (xv - mu) * inv;
                *dv = scale * (gv - mean_dy - xhat * mean_dy_xhat);
            }
        }
    }
    Ok((d_input, d_gamma, d_beta))
}
