//! Row-wise softmax and categorical cross-entropy.

use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Floor inside the log so a confidently wrong prediction stays finite.
const LOG_FLOOR: f64 = 1e-12;

/// Stabilized softmax over the last axis of an (N, K) tensor: the row max is
/// subtracted before exponentiation.
pub fn softmax<S: Scalar>(logits: &Tensor<S>) -> Result<Tensor<S>, NnError> {
    let (_, k) = logits.dims2()?;
    if !logits.all_finite() {
        return Err(NnError::NonFinite("softmax input"));
    }
    let mut out = Tensor::zeros(logits.shape());
    for (row_in, row_out) in logits.data().chunks(k).zip(out.data_mut().chunks_mut(k)) {
        let mut max = row_in[0];
        for &v in &row_in[1..] {
            if v > max {
                max = v;
            }
        }
        let mut sum = S::zero();
        for (o, &v) in row_out.iter_mut().zip(row_in) {
            let e = (v - max).exp();
            *o = e;
            sum += e;
        }
        for o in row_out.iter_mut() {
            *o /= sum;
        }
    }
    Ok(out)
}

/// One-hot encode class labels into an (N, K) tensor.
pub fn one_hot<S: Scalar>(labels: &[usize], classes: usize) -> Result<Tensor<S>, NnError> {
    let mut t = Tensor::zeros(&[labels.len(), classes]);
    for (row, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(NnError::ShapeMismatch(format!(
                "label {label} outside {classes} classes"
            )));
        }
        t.data_mut()[row * classes + label] = S::one();
    }
    Ok(t)
}

/// Mean categorical cross-entropy between predicted probabilities and
/// one-hot targets: −(1/N)·Σ t·ln(max(p, 1e-12)).
pub fn cross_entropy<S: Scalar>(probs: &Tensor<S>, targets: &Tensor<S>) -> Result<S, NnError> {
    let (n, _) = probs.dims2()?;
    if probs.shape() != targets.shape() {
        return Err(NnError::ShapeMismatch(format!(
            "probabilities {:?} vs targets {:?}",
            probs.shape(),
            targets.shape()
        )));
    }
    let floor = S::from_f64(LOG_FLOOR);
    let mut loss = S::zero();
    for (&p, &t) in probs.data().iter().zip(targets.data()) {
        if t != S::zero() {
            loss -= t * p.max(floor).ln();
        }
    }
    Ok(loss / S::from_f64(n as f64))
}

/// Fused loss head: softmax, mean cross-entropy, and the logit gradient
/// (probs − targets) / N in one call.
pub fn softmax_cross_entropy<S: Scalar>(
    logits: &Tensor<S>,
    targets: &Tensor<S>,
) -> Result<(S, Tensor<S>), NnError> {
    let probs = softmax(logits)?;
    let loss = cross_entropy(&probs, targets)?;
    let (n, _) = logits.dims2()?;
    let inv_n = S::from_f64(1.0 / n as f64);
    let mut grad = probs;
    for (g, &t) in grad.data_mut().iter_mut().zip(targets.data()) {
        *g = (*g - t) * inv_n;
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_rows_sum_to_one() {
        let x = Tensor::<f64>::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, -5.0, 0.0, 5.0]).unwrap();
        let p = softmax(&x).unwrap();
        for row in p.data().chunks(3) {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn softmax_known_values() {
        let x = Tensor::<f64>::from_vec(&[1, 3], vec![1.0, 2.0, 3.0]).unwrap();
        let p = softmax(&x).unwrap();
        let e: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|v| v.exp()).collect();
        let z: f64 = e.iter().sum();
        for (got, want) in p.data().iter().zip(e.iter().map(|v| v / z)) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_invariance_via_stabilization() {
        let a = Tensor::<f64>::from_vec(&[1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::<f64>::from_vec(&[1, 4], vec![1001.0, 1002.0, 1003.0, 1004.0]).unwrap();
        let pa = softmax(&a).unwrap();
        let pb = softmax(&b).unwrap();
        for (x, y) in pa.data().iter().zip(pb.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rejects_non_finite_logits() {
        let x = Tensor::<f64>::from_vec(&[1, 2], vec![f64::NAN, 0.0]).unwrap();
        assert!(matches!(softmax(&x), Err(NnError::NonFinite(_))));
    }

    #[test]
    fn uniform_prediction_costs_ln_k() {
        let p = Tensor::<f64>::from_vec(&[1, 4], vec![0.25; 4]).unwrap();
        let t = one_hot::<f64>(&[2], 4).unwrap();
        let loss = cross_entropy(&p, &t).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn clamp_keeps_zero_probability_finite() {
        let p = Tensor::<f64>::from_vec(&[1, 2], vec![0.0, 1.0]).unwrap();
        let t = one_hot::<f64>(&[0], 2).unwrap();
        let loss = cross_entropy(&p, &t).unwrap();
        assert!((loss - (-(1e-12f64).ln())).abs() < 1e-9);
        assert!(loss.is_finite());
    }

    #[test]
    fn fused_gradient_is_probs_minus_targets_over_n() {
        let logits =
            Tensor::<f64>::from_vec(&[2, 3], vec![0.3, -0.2, 0.9, 1.5, 0.0, -1.0]).unwrap();
        let targets = one_hot::<f64>(&[2, 0], 3).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, &targets).unwrap();
        let probs = softmax(&logits).unwrap();
        for i in 0..6 {
            let expect = (probs.data()[i] - targets.data()[i]) / 2.0;
            assert!((grad.data()[i] - expect).abs() < 1e-15);
        }
        let manual = cross_entropy(&probs, &targets).unwrap();
        assert_eq!(loss.to_bits(), manual.to_bits());
    }

    #[test]
    fn one_hot_rejects_out_of_range() {
        assert!(one_hot::<f32>(&[0, 4], 4).is_err());
    }
}
