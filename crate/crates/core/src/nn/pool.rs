//! Average pooling: fixed 2×2/stride-2 windows and the global variant.

use super::tensor::{Scalar, Tensor};
use super::NnError;

/// 2×2 stride-2 average pooling. Spatial dims must be even.
pub fn avg_pool2_forward<S: Scalar>(input: &Tensor<S>) -> Result<Tensor<S>, NnError> {
    let (n, c, h, w) = input.dims4()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NnError::ShapeMismatch(format!(
            "2×2 pooling needs even spatial dims, got {h}×{w}"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let quarter = S::from_f64(0.25);
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    for plane in 0..n * c {
        let src = &input.data()[plane * h * w..(plane + 1) * h * w];
        let dst = &mut out.data_mut()[plane * oh * ow..(plane + 1) * oh * ow];
        for oy in 0..oh {
            let top = 2 * oy * w;
            let bottom = top + w;
            for ox in 0..ow {
                let x = 2 * ox;
                dst[oy * ow + ox] =
                    (src[top + x] + src[top + x + 1] + src[bottom + x] + src[bottom + x + 1])
                        * quarter;
            }
        }
    }
    Ok(out)
}

/// Backward of 2×2 average pooling: spread each upstream value evenly.
pub fn avg_pool2_backward<S: Scalar>(
    input_shape: &[usize],
    grad_out: &Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    let [n, c, h, w] = *input_shape else {
        return Err(NnError::ShapeMismatch("pool input shape must be 4-d".into()));
    };
    let (gn, gc, oh, ow) = grad_out.dims4()?;
    if (gn, gc, oh * 2, ow * 2) != (n, c, h, w) {
        return Err(NnError::ShapeMismatch(format!(
            "pool grad {:?} for input {input_shape:?}",
            grad_out.shape()
        )));
    }
    let quarter = S::from_f64(0.25);
    let mut out = Tensor::zeros(input_shape);
    for plane in 0..n * c {
        let src = &grad_out.data()[plane * oh * ow..(plane + 1) * oh * ow];
        let dst = &mut out.data_mut()[plane * h * w..(plane + 1) * h * w];
        for oy in 0..oh {
            for ox in 0..ow {
                let v = src[oy * ow + ox] * quarter;
                let top = 2 * oy * w + 2 * ox;
                dst[top] = v;
                dst[top + 1] = v;
                dst[top + w] = v;
                dst[top + w + 1] = v;
            }
        }
    }
    Ok(out)
}

/// Collapse each channel plane to its mean: (N, C, H, W) → (N, C).
pub fn global_avg_pool_forward<S: Scalar>(input: &Tensor<S>) -> Result<Tensor<S>, NnError> {
    let (n, c, h, w) = input.dims4()?;
    let scale = S::from_f64(1.0 / (h * w) as f64);
    let mut out = Tensor::zeros(&[n, c]);
    for (plane, o) in out.data_mut().iter_mut().enumerate() {
        let src = &input.data()[plane * h * w..(plane + 1) * h * w];
        let mut sum = S::zero();
        for &v in src {
            sum += v;
        }
        *o = sum * scale;
    }
    Ok(out)
}

/// Backward of global average pooling.
pub fn global_avg_pool_backward<S: Scalar>(
    input_shape: &[usize],
    grad_out: &Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    let [n, c, h, w] = *input_shape else {
        return Err(NnError::ShapeMismatch("pool input shape must be 4-d".into()));
    };
    let (gn, gc) = grad_out.dims2()?;
    if (gn, gc) != (n, c) {
        return Err(NnError::ShapeMismatch(format!(
            "global pool grad {:?} for input {input_shape:?}",
            grad_out.shape()
        )));
    }
    let scale = S::from_f64(1.0 / (h * w) as f64);
    let mut out = Tensor::zeros(input_shape);
    for (plane, &g) in grad_out.data().iter().enumerate() {
        let v = g * scale;
        for o in &mut out.data_mut()[plane * h * w..(plane + 1) * h * w] {
            *o = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages_quads() {
        let x = Tensor::<f64>::from_vec(
            &[1, 1, 4, 4],
            (1..=16).map(|i| i as f64).collect(),
        )
        .unwrap();
        let y = avg_pool2_forward(&x).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert_eq!(y.data(), &[3.5, 5.5, 11.5, 13.5]);
    }

    #[test]
    fn odd_dims_rejected() {
        let x = Tensor::<f32>::zeros(&[1, 1, 5, 4]);
        assert!(avg_pool2_forward(&x).is_err());
    }

    #[test]
    fn pool_backward_spreads_evenly() {
        let g = Tensor::<f64>::from_vec(&[1, 1, 1, 1], vec![8.0]).unwrap();
        let dx = avg_pool2_backward(&[1, 1, 2, 2], &g).unwrap();
        assert_eq!(dx.data(), &[2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn global_pool_means_and_gradient() {
        let x = Tensor::<f64>::from_vec(
            &[2, 2, 2, 2],
            vec![
                1.0, 2.0, 3.0, 4.0, // sample 0 channel 0 → 2.5
                10.0, 10.0, 10.0, 10.0, // → 10
                0.0, 0.0, 0.0, 4.0, // sample 1 channel 0 → 1
                -2.0, 2.0, -2.0, 2.0, // → 0
            ],
        )
        .unwrap();
        let y = global_avg_pool_forward(&x).unwrap();
        assert_eq!(y.shape(), &[2, 2]);
        assert_eq!(y.data(), &[2.5, 10.0, 1.0, 0.0]);

        let g = Tensor::<f64>::from_vec(&[2, 2], vec![4.0, 0.0, -8.0, 1.0]).unwrap();
        let dx = global_avg_pool_backward(&[2, 2, 2, 2], &g).unwrap();
        assert_eq!(&dx.data()[0..4], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(&dx.data()[4..8], &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(&dx.data()[8..12], &[-2.0, -2.0, -2.0, -2.0]);
        assert_eq!(&dx.data()[12..16], &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn pooling_a_constant_plane_is_identity_on_values() {
        let x = Tensor::<f32>::from_vec(&[1, 1, 6, 6], vec![3.0; 36]).unwrap();
        let y = avg_pool2_forward(&x).unwrap();
        assert!(y.data().iter().all(|&v| v == 3.0));
        let z = global_avg_pool_forward(&x).unwrap();
        assert_eq!(z.data(), &[3.0]);
    }
}
