//! RMSProp update rule.

use serde::{Deserialize, Serialize};

use super::tensor::Scalar;
use super::NnError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmsPropParams {
    pub learning_rate: f64,
    /// Decay ρ of the squared-gradient average.
    pub decay: f64,
    pub epsilon: f64,
}

impl Default for RmsPropParams {
    fn default() -> Self {
        RmsPropParams {
            learning_rate: 0.001,
            decay: 0.9,
            epsilon: 1e-8,
        }
    }
}

/// One update step:
///   v ← ρ·v + (1 − ρ)·g²
///   p ← p − lr·g / (√v + ε)
pub fn rmsprop_step<S: Scalar>(
    param: &mut [S],
    moment: &mut [S],
    grad: &[S],
    cfg: &RmsPropParams,
) -> Result<(), NnError> {
    if param.len() != moment.len() || param.len() != grad.len() {
        return Err(NnError::ShapeMismatch(format!(
            "rmsprop buffers of {}, {}, {}",
            param.len(),
            moment.len(),
            grad.len()
        )));
    }
    let lr = S::from_f64(cfg.learning_rate);
    let rho = S::from_f64(cfg.decay);
    let one_minus_rho = S::from_f64(1.0 - cfg.decay);
    let eps = S::from_f64(cfg.epsilon);
    for ((p, v), &g) in param.iter_mut().zip(moment.iter_mut()).zip(grad) {
        *v = rho * *v + one_minus_rho * (g * g);
        *p -= lr * g / (v.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_magnitude() {
        let cfg = RmsPropParams::default();
        let mut p = [0.0f64];
        let mut v = [0.0f64];
        rmsprop_step(&mut p, &mut v, &[1.0], &cfg).unwrap();
        // v = 0.1, Δ = 0.001/(√0.1 + 1e-8) ≈ 0.00316228. The bitwise oracle
        // repeats the step's own (1−ρ) rounding.
        assert!((v[0] - 0.1).abs() < 1e-15);
        let expect = cfg.learning_rate / (((1.0 - cfg.decay) * 1.0).sqrt() + cfg.epsilon);
        assert_eq!(p[0], -expect);
        assert!((p[0] + 0.003_162_28).abs() < 1e-8);
    }

    #[test]
    fn moment_accumulates_two_steps() {
        let cfg = RmsPropParams::default();
        let mut p = [0.0f64];
        let mut v = [0.0f64];
        rmsprop_step(&mut p, &mut v, &[1.0], &cfg).unwrap();
        rmsprop_step(&mut p, &mut v, &[1.0], &cfg).unwrap();
        // v = 0.9·0.1 + 0.1 = 0.19.
        assert!((v[0] - 0.19).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let cfg = RmsPropParams::default();
        let mut p = [1.5f32, -2.0];
        let mut v = [0.04f32, 0.0];
        rmsprop_step(&mut p, &mut v, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(p, [1.5, -2.0]);
        // Moment still decays toward zero.
        assert!((v[0] - 0.9 * 0.04).abs() < 1e-7);
    }

    #[test]
    fn descends_a_quadratic() {
        // f(p) = p², gradient 2p. The normalized step is ≈ lr while the
        // gradient is steady, so 3/0.001 steps with margin reach the floor.
        let cfg = RmsPropParams::default();
        let mut p = [3.0f64];
        let mut v = [0.0f64];
        for _ in 0..4000 {
            let g = [2.0 * p[0]];
            rmsprop_step(&mut p, &mut v, &g, &cfg).unwrap();
        }
        assert!(p[0].abs() < 0.1, "p = {}", p[0]);
    }

    #[test]
    fn length_mismatch_rejected() {
        let cfg = RmsPropParams::default();
        let mut p = [0.0f64; 2];
        let mut v = [0.0f64; 2];
        assert!(rmsprop_step(&mut p, &mut v, &[1.0], &cfg).is_err());
    }
}
