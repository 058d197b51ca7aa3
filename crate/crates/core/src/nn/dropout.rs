//! Inverted dropout with a fully seed-determined mask.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Training-mode dropout. Each element survives with probability 1 − rate
/// and is scaled by 1/(1 − rate); the mask depends only on `seed` and the
/// element index. Eval mode is the identity — simply don't call this.
pub fn dropout_train<S: Scalar>(
    input: &Tensor<S>,
    rate: f64,
    seed: u64,
) -> Result<(Tensor<S>, Vec<bool>), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::ShapeMismatch(format!(
            "dropout rate {rate} outside [0, 1)"
        )));
    }
    let keep = 1.0 - rate;
    let scale = S::from_f64(1.0 / keep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = Vec::with_capacity(input.len());
    let data = input
        .data()
        .iter()
        .map(|&v| {
            let live = rng.random::<f64>() < keep;
            mask.push(live);
            if live {
                v * scale
            } else {
                S::zero()
            }
        })
        .collect();
    Ok((Tensor::from_vec(input.shape(), data)?, mask))
}

/// Backward: replay the mask and scaling on the upstream gradient.
pub fn dropout_backward<S: Scalar>(
    mask: &[bool],
    rate: f64,
    grad_out: &Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    if mask.len() != grad_out.len() {
        return Err(NnError::ShapeMismatch(format!(
            "dropout mask of {} for gradient of {}",
            mask.len(),
            grad_out.len()
        )));
    }
    let scale = S::from_f64(1.0 / (1.0 - rate));
    let data = grad_out
        .data()
        .iter()
        .zip(mask)
        .map(|(&g, &live)| if live { g * scale } else { S::zero() })
        .collect();
    Tensor::from_vec(grad_out.shape(), data)
}
