//! Central-difference gradient verification for any `Layer<f64>`.
//!
//! The probe loss is a fixed random linear functional of the layer output,
//! L = Σ cᵢ·yᵢ, so dL/dy is the coefficient tensor itself and every
//! parameter and input gradient can be checked independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{Layer, Mode};
use super::tensor::Tensor;
use super::NnError;

const STEP: f64 = 1e-5;
const REL_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct GradCheckReport {
    /// Worst relative error over every parameter and input element.
    pub max_rel_error: f64,
    /// Number of scalar gradients compared.
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error.is_finite() && self.max_rel_error <= self.tolerance
    }
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Probe loss over a forward pass. Train mode throughout: that is the path
/// backward differentiates (batch statistics, dropout masks), and stochastic
/// layers are seed-deterministic so repeated calls see identical masks.
fn probe_loss(
    layer: &mut dyn Layer<f64>,
    input: &Tensor<f64>,
    coeffs: &[f64],
) -> Result<f64, NnError> {
    let out = layer.forward(input, Mode::Train)?;
    debug_assert_eq!(out.len(), coeffs.len());
    Ok(out.data().iter().zip(coeffs).map(|(&y, &c)| y * c).sum())
}

fn nudge_param(layer: &mut dyn Layer<f64>, index: usize, delta: f64) {
    let mut seen = 0;
    layer.visit_params(&mut |p| {
        let len = p.value.len();
        if index >= seen && index < seen + len {
            p.value.data_mut()[index - seen] += delta;
        }
        seen += len;
    });
}

/// Compare analytic gradients against central differences for every
/// parameter and every input element. The same report is produced for any
/// layer, including composites; `tolerance` is the relative-error bound the
/// caller considers a pass.
pub fn grad_check(
    layer: &mut dyn Layer<f64>,
    input: &Tensor<f64>,
    tolerance: f64,
) -> Result<GradCheckReport, NnError> {
    let out = layer.forward(input, Mode::Train)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6164);
    let coeffs: Vec<f64> = (0..out.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let coeff_tensor = Tensor::from_vec(out.shape(), coeffs.clone())?;

    // Analytic pass. Parameter grads accumulate, so clear them first.
    layer.visit_params(&mut |p| p.zero_grad());
    layer.forward(input, Mode::Train)?;
    let d_input = layer.backward(&coeff_tensor)?;
    let mut analytic_params = Vec::new();
    layer.visit_params(&mut |p| analytic_params.extend_from_slice(p.grad.data()));

    let mut max_rel: f64 = 0.0;
    let mut checked = 0;

    for k in 0..analytic_params.len() {
        nudge_param(layer, k, STEP);
        let plus = probe_loss(layer, input, &coeffs)?;
        nudge_param(layer, k, -2.0 * STEP);
        let minus = probe_loss(layer, input, &coeffs)?;
        nudge_param(layer, k, STEP);
        let numeric = (plus - minus) / (2.0 * STEP);
        max_rel = max_rel.max(rel_error(analytic_params[k], numeric));
        checked += 1;
    }

    let mut x = input.clone();
    for k in 0..x.len() {
        let orig = x.data()[k];
        x.data_mut()[k] = orig + STEP;
        let plus = probe_loss(layer, &x, &coeffs)?;
        x.data_mut()[k] = orig - STEP;
        let minus = probe_loss(layer, &x, &coeffs)?;
        x.data_mut()[k] = orig;
        let numeric = (plus - minus) / (2.0 * STEP);
        max_rel = max_rel.max(rel_error(d_input.data()[k], numeric));
        checked += 1;
    }

    Ok(GradCheckReport {
        max_rel_error: max_rel,
        checked,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layers::{
        AvgPool2, BatchNorm, Conv2d, Dense, DenseBlock, Dropout, GlobalAvgPool, Relu, Transition,
    };

    /// Values bounded away from zero so ReLU kinks sit far from the probes.
    fn offset_input(shape: &[usize], seed: u64) -> Tensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..shape.iter().product::<usize>())
            .map(|_| {
                let v: f64 = rng.random_range(0.2..1.0);
                if rng.random::<bool>() {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Tensor::from_vec(shape, data).unwrap()
    }

    #[test]
    fn conv2d_is_exact_to_rounding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut layer = Conv2d::new(2, 3, 3, 1, 1, &mut rng);
        let report = grad_check(&mut layer, &offset_input(&[2, 2, 5, 5], 2), 1e-6).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
        // params: 3·2·3·3 weights + 3 bias, inputs: 2·2·5·5.
        assert_eq!(report.checked, 57 + 100);
    }

    #[test]
    fn dense_is_exact_to_rounding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut layer = Dense::new(6, 4, &mut rng);
        let report = grad_check(&mut layer, &offset_input(&[3, 6], 4), 1e-6).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }

    #[test]
    fn batchnorm_within_loose_bound() {
        let mut layer = BatchNorm::<f64>::new(3);
        let report = grad_check(&mut layer, &offset_input(&[4, 3, 3, 3], 5), 1e-4).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }

    #[test]
    fn relu_away_from_kink() {
        let mut layer = Relu::new();
        let report = grad_check(&mut layer, &offset_input(&[2, 3, 4, 4], 6), 1e-6).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }

    #[test]
    fn pooling_layers_are_linear() {
        let mut pool = AvgPool2::new();
        let report = grad_check(&mut pool, &offset_input(&[2, 2, 6, 6], 7), 1e-6).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);

        let mut gap = GlobalAvgPool::new();
        let report = grad_check(&mut gap, &offset_input(&[2, 3, 4, 4], 8), 1e-6).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }

    #[test]
    fn dropout_mask_is_stable_under_probing() {
        let mut dropout = Dropout::new(0.4);
        let layer: &mut dyn Layer<f64> = &mut dropout;
        layer.reseed(99);
        let report = grad_check(layer, &offset_input(&[2, 3, 4, 4], 9), 1e-6).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }

    #[test]
    fn dense_block_composite() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut layer = DenseBlock::new(3, 2, 2, &mut rng);
        let report = grad_check(&mut layer, &offset_input(&[2, 3, 4, 4], 11), 1e-4).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }

    #[test]
    fn transition_composite() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut layer = Transition::new(4, 2, &mut rng);
        let report = grad_check(&mut layer, &offset_input(&[2, 4, 4, 4], 13), 1e-4).unwrap();
        assert!(report.passed(), "max rel {}", report.max_rel_error);
    }
}
