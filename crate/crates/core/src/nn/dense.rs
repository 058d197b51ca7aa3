//! Fully-connected layer: y = x·Wᵀ + b with W stored (OUT, IN).

use super::kernels::{matmul_ab, matmul_abt, matmul_atb};
use super::tensor::{Scalar, Tensor};
use super::NnError;

pub fn dense_forward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &[S],
) -> Result<Tensor<S>, NnError> {
    let (n, f) = input.dims2()?;
    let [out_f, in_f] = *weights.shape() else {
        return Err(NnError::ShapeMismatch(format!(
            "dense weights must be 2-d, got {:?}",
            weights.shape()
        )));
    };
    if in_f != f || bias.len() != out_f {
        return Err(NnError::ShapeMismatch(format!(
            "dense ({out_f}, {in_f}) with bias {} on input ({n}, {f})",
            bias.len()
        )));
    }
    let mut out = Tensor::zeros(&[n, out_f]);
    for row in out.data_mut().chunks_mut(out_f) {
        row.copy_from_slice(bias);
    }
    matmul_abt(input.data(), weights.data(), out.data_mut(), n, out_f, f);
    Ok(out)
}

/// Returns (d_input, d_weights, d_bias).
pub fn dense_backward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    grad_out: &Tensor<S>,
) -> Result<(Tensor<S>, Tensor<S>, Vec<S>), NnError> {
    let (n, f) = input.dims2()?;
    let [out_f, in_f] = *weights.shape() else {
        return Err(NnError::ShapeMismatch("dense weights must be 2-d".into()));
    };
    let (gn, gf) = grad_out.dims2()?;
    if gn != n || gf != out_f || in_f != f {
        return Err(NnError::ShapeMismatch(format!(
            "dense backward: input ({n}, {f}), weights ({out_f}, {in_f}), grad {:?}",
            grad_out.shape()
        )));
    }

    let mut d_input = Tensor::zeros(&[n, f]);
    matmul_ab(grad_out.data(), weights.data(), d_input.data_mut(), n, out_f, f);

    let mut d_weights = Tensor::zeros(&[out_f, in_f]);
    matmul_atb(grad_out.data(), input.data(), d_weights.data_mut(), n, out_f, f);

    let mut d_bias = vec![S::zero(); out_f];
    for row in grad_out.data().chunks(out_f) {
        for (db, &g) in d_bias.iter_mut().zip(row) {
            *db += g;
        }
    }
    Ok((d_input, d_weights, d_bias))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_small_example() {
        // y = x·Wᵀ + b with x = [[1, 2]], W = [[3, 4], [5, 6]], b = [10, 20].
        let x = Tensor::<f64>::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        let w = Tensor::<f64>::from_vec(&[2, 2], vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let y = dense_forward(&x, &w, &[10.0, 20.0]).unwrap();
        assert_eq!(y.data(), &[21.0, 37.0]);
    }

    #[test]
    fn backward_matches_manual_gradients() {
        let x = Tensor::<f64>::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = Tensor::<f64>::from_vec(&[2, 3], vec![0.1, 0.2, 0.3, -0.1, 0.5, 0.0]).unwrap();
        let g = Tensor::<f64>::from_vec(&[2, 2], vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        let (dx, dw, db) = dense_backward(&x, &w, &g).unwrap();

        // dx = g·W
        assert_eq!(dx.shape(), &[2, 3]);
        let expect_dx = [
            1.0 * 0.1 + -1.0 * -0.1,
            1.0 * 0.2 + -1.0 * 0.5,
            1.0 * 0.3 + -1.0 * 0.0,
            0.5 * 0.1 + 2.0 * -0.1,
            0.5 * 0.2 + 2.0 * 0.5,
            0.5 * 0.3 + 2.0 * 0.0,
        ];
        for (a, b) in dx.data().iter().zip(expect_dx) {
            assert!((a - b).abs() < 1e-12);
        }

        // dW[o][i] = Σ_n g[n][o]·x[n][i]
        let expect_dw = [
            1.0 * 1.0 + 0.5 * 4.0,
            1.0 * 2.0 + 0.5 * 5.0,
            1.0 * 3.0 + 0.5 * 6.0,
            -1.0 * 1.0 + 2.0 * 4.0,
            -1.0 * 2.0 + 2.0 * 5.0,
            -1.0 * 3.0 + 2.0 * 6.0,
        ];
        for (a, b) in dw.data().iter().zip(expect_dw) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(db, vec![1.5, 1.0]);
    }

    #[test]
    fn shape_errors() {
        let x = Tensor::<f32>::zeros(&[1, 3]);
        let w = Tensor::<f32>::zeros(&[2, 4]);
        assert!(dense_forward(&x, &w, &[0.0; 2]).is_err());
        let w = Tensor::<f32>::zeros(&[2, 3]);
        assert!(dense_forward(&x, &w, &[0.0; 3]).is_err());
    }
}
