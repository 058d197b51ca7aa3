//! Rectified linear unit.

use super::tensor::{Scalar, Tensor};
use super::NnError;

pub fn relu_forward<S: Scalar>(input: &Tensor<S>) -> Tensor<S> {
    let data = input
        .data()
        .iter()
        .map(|&v| if v > S::zero() { v } else { S::zero() })
        .collect();
    Tensor::from_vec(input.shape(), data).expect("same shape")
}

/// Gradient gated by the forward *output*: zero slope at and below zero.
pub fn relu_backward<S: Scalar>(
    output: &Tensor<S>,
    grad_out: &Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    if output.shape() != grad_out.shape() {
        return Err(NnError::ShapeMismatch(format!(
            "relu grad {:?} vs output {:?}",
            grad_out.shape(),
            output.shape()
        )));
    }
    let data = output
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&y, &g)| if y > S::zero() { g } else { S::zero() })
        .collect();
    Tensor::from_vec(output.shape(), data)
}
