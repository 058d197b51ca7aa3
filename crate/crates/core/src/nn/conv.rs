//! 2-d convolution (NCHW) via im2col and the shared matrix kernels.

use super::kernels::{matmul_ab, matmul_abt, matmul_atb};
use super::tensor::{Scalar, Tensor};
use super::NnError;

pub(crate) fn conv_out_dim(input: usize, kernel: usize, stride: usize, pad: usize) -> usize {
    (input + 2 * pad - kernel) / stride + 1
}

fn check_geometry<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &[S],
    stride: usize,
) -> Result<(usize, usize, usize, usize, usize, usize, usize), NnError> {
    let (n, ic, h, w) = input.dims4()?;
    let [oc, wic, kh, kw] = *weights.shape() else {
        return Err(NnError::ShapeMismatch(format!(
            "conv weights must be 4-d, got {:?}",
            weights.shape()
        )));
    };
    if wic != ic {
        return Err(NnError::ShapeMismatch(format!(
            "conv weights expect {wic} input channels, input has {ic}"
        )));
    }
    if bias.len() != oc {
        return Err(NnError::ShapeMismatch(format!(
            "conv bias has {} entries for {oc} output channels",
            bias.len()
        )));
    }
    if stride == 0 {
        return Err(NnError::ShapeMismatch("conv stride must be ≥ 1".into()));
    }
    Ok((n, ic, h, w, oc, kh, kw))
}

/// Unfold one sample into a (IC·KH·KW) × (OH·OW) matrix. Out-of-bounds taps
/// read as zero (zero padding).
#[allow(clippy::too_many_arguments)]
fn im2col<S: Scalar>(
    x: &[S],
    ic: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
    cols: &mut [S],
) {
    debug_assert_eq!(cols.len(), ic * kh * kw * oh * ow);
    for v in cols.iter_mut() {
        *v = S::zero();
    }
    let m = oh * ow;
    for c in 0..ic {
        let plane = &x[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            for kx in 0..kw {
                let row = ((c * kh + ky) * kw + kx) * m;
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let src_row = iy as usize * w;
                    let dst_row = row + oy * ow;
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        cols[dst_row + ox] = plane[src_row + ix as usize];
                    }
                }
            }
        }
    }
}

/// Fold a column matrix back onto the input plane, accumulating overlaps.
#[allow(clippy::too_many_arguments)]
fn col2im<S: Scalar>(
    cols: &[S],
    ic: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
    x: &mut [S],
) {
    let m = oh * ow;
    for c in 0..ic {
        let plane = &mut x[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            for kx in 0..kw {
                let row = ((c * kh + ky) * kw + kx) * m;
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let src_row = row + oy * ow;
                    let dst_row = iy as usize * w;
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        plane[dst_row + ix as usize] += cols[src_row + ox];
                    }
                }
            }
        }
    }
}

/// Forward convolution. `weights` is (OC, IC, KH, KW); output is
/// (N, OC, OH, OW) with OH = (H + 2·pad − KH) / stride + 1.
pub fn conv2d_forward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &[S],
    stride: usize,
    pad: usize,
) -> Result<Tensor<S>, NnError> {
    let (n, ic, h, w, oc, kh, kw) = check_geometry(input, weights, bias, stride)?;
    if h + 2 * pad < kh || w + 2 * pad < kw {
        return Err(NnError::ShapeMismatch(format!(
            "kernel {kh}×{kw} larger than padded input {h}×{w}+{pad}"
        )));
    }
    let oh = conv_out_dim(h, kh, stride, pad);
    let ow = conv_out_dim(w, kw, stride, pad);
    let (k, m) = (ic * kh * kw, oh * ow);

    let mut out = Tensor::zeros(&[n, oc, oh, ow]);
    let mut cols = vec![S::zero(); k * m];
    for s in 0..n {
        im2col(
            &input.data()[s * ic * h * w..(s + 1) * ic * h * w],
            ic,
            h,
            w,
            kh,
            kw,
            stride,
            pad,
            oh,
            ow,
            &mut cols,
        );
        let out_s = &mut out.data_mut()[s * oc * m..(s + 1) * oc * m];
        for (ch, row) in out_s.chunks_mut(m).enumerate() {
            row.fill(bias[ch]);
        }
        matmul_ab(weights.data(), &cols, out_s, oc, k, m);
    }
    Ok(out)
}

pub struct ConvGrads<S> {
    pub input: Tensor<S>,
    pub weights: Tensor<S>,
    pub bias: Vec<S>,
}

/// Backward convolution: gradients for input, weights, and bias given the
/// upstream gradient. Per-sample contributions are reduced in sample order.
pub fn conv2d_backward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    stride: usize,
    pad: usize,
    grad_out: &Tensor<S>,
) -> Result<ConvGrads<S>, NnError> {
    let (n, ic, h, w) = input.dims4()?;
    let [oc, _, kh, kw] = *weights.shape() else {
        return Err(NnError::ShapeMismatch("conv weights must be 4-d".into()));
    };
    let oh = conv_out_dim(h, kh, stride, pad);
    let ow = conv_out_dim(w, kw, stride, pad);
    let (gn, goc, goh, gow) = grad_out.dims4()?;
    if (gn, goc, goh, gow) != (n, oc, oh, ow) {
        return Err(NnError::ShapeMismatch(format!(
            "upstream grad {:?} does not match conv output ({n}, {oc}, {oh}, {ow})",
            grad_out.shape()
        )));
    }
    let (k, m) = (ic * kh * kw, oh * ow);

    let mut d_input = Tensor::zeros(&[n, ic, h, w]);
    let mut d_weights = Tensor::zeros(weights.shape());
    let mut d_bias = vec![S::zero(); oc];
    let mut cols = vec![S::zero(); k * m];
    let mut d_cols = vec![S::zero(); k * m];

    for s in 0..n {
        let g = &grad_out.data()[s * oc * m..(s + 1) * oc * m];
        for (ch, row) in g.chunks(m).enumerate() {
            for &v in row {
                d_bias[ch] += v;
            }
        }

        im2col(
            &input.data()[s * ic * h * w..(s + 1) * ic * h * w],
            ic,
            h,
            w,
            kh,
            kw,
            stride,
            pad,
            oh,
            ow,
            &mut cols,
        );
        // dW[oc][k] += Σ_m g[oc][m] · cols[k][m]
        matmul_abt(g, &cols, d_weights.data_mut(), oc, k, m);

        // d_cols[k][m] = Σ_oc W[oc][k] · g[oc][m]
        for v in d_cols.iter_mut() {
            *v = S::zero();
        }
        matmul_atb(weights.data(), g, &mut d_cols, oc, k, m);
        col2im(
            &d_cols,
            ic,
            h,
            w,
            kh,
            kw,
            stride,
            pad,
            oh,
            ow,
            &mut d_input.data_mut()[s * ic * h * w..(s + 1) * ic * h * w],
        );
    }

    Ok(ConvGrads {
        input: d_input,
        weights: d_weights,
        bias: d_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct nested-loop convolution, the oracle for the im2col path.
    fn conv_naive(
        input: &Tensor<f64>,
        weights: &Tensor<f64>,
        bias: &[f64],
        stride: usize,
        pad: usize,
    ) -> Tensor<f64> {
        let (n, ic, h, w) = input.dims4().unwrap();
        let [oc, _, kh, kw] = *weights.shape() else { unreachable!() };
        let oh = conv_out_dim(h, kh, stride, pad);
        let ow = conv_out_dim(w, kw, stride, pad);
        let mut out = Tensor::zeros(&[n, oc, oh, ow]);
        for s in 0..n {
            for o in 0..oc {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = bias[o];
                        for c in 0..ic {
                            for ky in 0..kh {
                                for kx in 0..kw {
                                    let iy = (oy * stride + ky) as isize - pad as isize;
                                    let ix = (ox * stride + kx) as isize - pad as isize;
                                    if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                        continue;
                                    }
                                    let xv = input.data()
                                        [((s * ic + c) * h + iy as usize) * w + ix as usize];
                                    let wv = weights.data()[((o * ic + c) * kh + ky) * kw + kx];
                                    acc += xv * wv;
                                }
                            }
                        }
                        out.data_mut()[((s * oc + o) * oh + oy) * ow + ox] = acc;
                    }
                }
            }
        }
        out
    }

    fn ramp(shape: &[usize], scale: f64) -> Tensor<f64> {
        let len: usize = shape.iter().product();
        Tensor::from_vec(
            shape,
            (0..len).map(|i| ((i as f64) * scale).sin()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn matches_naive_convolution() {
        for &(stride, pad) in &[(1usize, 0usize), (1, 1), (2, 1), (2, 0), (3, 2)] {
            let input = ramp(&[2, 3, 9, 8], 0.37);
            let weights = ramp(&[4, 3, 3, 3], 0.11);
            let bias = [0.1, -0.2, 0.3, 0.0];
            let fast = conv2d_forward(&input, &weights, &bias, stride, pad).unwrap();
            let slow = conv_naive(&input, &weights, &bias, stride, pad);
            assert_eq!(fast.shape(), slow.shape(), "stride {stride} pad {pad}");
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).abs() < 1e-12, "stride {stride} pad {pad}");
            }
        }
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        // 1×1 kernel with weight 1 on the diagonal channel map.
        let input = ramp(&[1, 2, 4, 4], 0.5);
        let weights =
            Tensor::from_vec(&[2, 2, 1, 1], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = conv2d_forward(&input, &weights, &[0.0, 0.0], 1, 0).unwrap();
        assert_eq!(out.data(), input.data());
    }

    #[test]
    fn stride_two_downsamples() {
        let input = ramp(&[1, 3, 200, 200], 0.01);
        let weights = ramp(&[16, 3, 3, 3], 0.02);
        let out = conv2d_forward(&input, &weights, &vec![0.0; 16], 2, 1).unwrap();
        assert_eq!(out.shape(), &[1, 16, 100, 100]);
    }

    #[test]
    fn shape_errors() {
        let input = ramp(&[1, 3, 8, 8], 0.1);
        let weights = ramp(&[4, 2, 3, 3], 0.1); // wrong in-channels
        assert!(conv2d_forward(&input, &weights, &[0.0; 4], 1, 1).is_err());
        let weights = ramp(&[4, 3, 3, 3], 0.1);
        assert!(conv2d_forward(&input, &weights, &[0.0; 3], 1, 1).is_err()); // bias len
        assert!(conv2d_forward(&input, &weights, &[0.0; 4], 0, 1).is_err()); // stride 0
    }

    #[test]
    fn backward_bias_gradient_sums_upstream() {
        let input = ramp(&[2, 2, 5, 5], 0.3);
        let weights = ramp(&[3, 2, 3, 3], 0.2);
        let out = conv2d_forward(&input, &weights, &[0.0; 3], 1, 1).unwrap();
        let ones = Tensor::from_vec(out.shape(), vec![1.0; out.len()]).unwrap();
        let grads = conv2d_backward(&input, &weights, 1, 1, &ones).unwrap();
        // Each bias sees one unit per output position per sample.
        for &db in &grads.bias {
            assert!((db - (2 * 5 * 5) as f64).abs() < 1e-9);
        }
        assert_eq!(grads.input.shape(), input.shape());
        assert_eq!(grads.weights.shape(), weights.shape());
    }
}
