//! Network assembly: spec → layer stack, plus whole-network passes and the
//! optimizer walk.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::conv::conv_out_dim;
use super::layers::{
    Conv2d, Dense, DenseBlock, Dropout, GlobalAvgPool, Layer, Mode, Param, Transition,
};
use super::rmsprop::{rmsprop_step, RmsPropParams};
use super::tensor::{Scalar, Tensor};
use super::NnError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub layers: usize,
    pub growth: usize,
}

/// Architecture description. The stack is:
/// stem conv → dense blocks joined by transitions → global average pool →
/// dropout → dense classifier (logits; softmax lives in the loss).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_channels: usize,
    pub input_height: usize,
    pub input_width: usize,
    pub stem_channels: usize,
    pub stem_kernel: usize,
    pub stem_stride: usize,
    pub blocks: Vec<BlockSpec>,
    /// Channel keep-ratio at each transition, (0, 1].
    pub compression: f64,
    /// Dropout rate before the classifier, [0, 1).
    pub dropout: f64,
    pub classes: usize,
}

impl NetworkSpec {
    /// Compact two-block network for `channels × height × width` inputs.
    pub fn mini(channels: usize, height: usize, width: usize, classes: usize) -> Self {
        NetworkSpec {
            input_channels: channels,
            input_height: height,
            input_width: width,
            stem_channels: 16,
            stem_kernel: 3,
            stem_stride: 2,
            blocks: vec![
                BlockSpec { layers: 4, growth: 8 },
                BlockSpec { layers: 4, growth: 8 },
            ],
            compression: 0.5,
            dropout: 0.5,
            classes,
        }
    }

    /// Walk the spec, checking feasibility; returns (channels, h, w) at the
    /// classifier input.
    pub fn validate(&self) -> Result<(usize, usize, usize), NnError> {
        let fail = |msg: String| Err(NnError::InvalidSpec(msg));
        if self.input_channels == 0 || self.input_height == 0 || self.input_width == 0 {
            return fail("empty input".into());
        }
        if self.stem_channels == 0 || self.classes < 2 {
            return fail(format!(
                "stem {} channels, {} classes",
                self.stem_channels, self.classes
            ));
        }
        if self.stem_kernel == 0 || self.stem_kernel % 2 == 0 {
            return fail(format!("stem kernel {} must be odd", self.stem_kernel));
        }
        if self.stem_stride == 0 {
            return fail("stem stride must be ≥ 1".into());
        }
        if self.blocks.is_empty() {
            return fail("at least one dense block".into());
        }
        if !(self.compression > 0.0 && self.compression <= 1.0) {
            return fail(format!("compression {} outside (0, 1]", self.compression));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }

        let pad = (self.stem_kernel - 1) / 2;
        if self.input_height + 2 * pad < self.stem_kernel
            || self.input_width + 2 * pad < self.stem_kernel
        {
            return fail("input smaller than stem kernel".into());
        }
        let mut h = conv_out_dim(self.input_height, self.stem_kernel, self.stem_stride, pad);
        let mut w = conv_out_dim(self.input_width, self.stem_kernel, self.stem_stride, pad);
        let mut c = self.stem_channels;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.layers == 0 || b.growth == 0 {
                return fail(format!("block {i} has layers {} growth {}", b.layers, b.growth));
            }
            c += b.layers * b.growth;
            if i + 1 < self.blocks.len() {
                if h % 2 != 0 || w % 2 != 0 {
                    return fail(format!(
                        "transition {i} needs even spatial dims, has {h}×{w}"
                    ));
                }
                c = (c as f64 * self.compression).floor() as usize;
                if c == 0 {
                    return fail(format!("compression starves transition {i}"));
                }
                h /= 2;
                w /= 2;
            }
        }
        if h == 0 || w == 0 {
            return fail("spatial dims collapsed before the classifier".into());
        }
        Ok((c, h, w))
    }
}

impl Default for NetworkSpec {
    /// Matches the default 200×200 replicated-channel motif, 4 regions.
    fn default() -> Self {
        NetworkSpec::mini(3, 200, 200, 4)
    }
}

pub struct Network<S: Scalar> {
    spec: NetworkSpec,
    layers: Vec<Box<dyn Layer<S>>>,
}

impl<S: Scalar> Network<S> {
    /// Build and He-initialize. All weight draws come from one ChaCha stream
    /// seeded here, in layer declaration order, so a seed fully determines
    /// the starting point.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self, NnError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers: Vec<Box<dyn Layer<S>>> = Vec::new();

        let pad = (spec.stem_kernel - 1) / 2;
        layers.push(Box::new(Conv2d::new(
            spec.input_channels,
            spec.stem_channels,
            spec.stem_kernel,
            spec.stem_stride,
            pad,
            &mut rng,
        )));

        let mut c = spec.stem_channels;
        for (i, b) in spec.blocks.iter().enumerate() {
            layers.push(Box::new(DenseBlock::new(c, b.layers, b.growth, &mut rng)));
            c += b.layers * b.growth;
            if i + 1 < spec.blocks.len() {
                let compressed = (c as f64 * spec.compression).floor() as usize;
                layers.push(Box::new(Transition::new(c, compressed, &mut rng)));
                c = compressed;
            }
        }

        layers.push(Box::new(GlobalAvgPool::new()));
        layers.push(Box::new(Dropout::new(spec.dropout)));
        layers.push(Box::new(Dense::new(c, spec.classes, &mut rng)));

        Ok(Network { spec, layers })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    /// Run the stack; returns logits of shape (N, classes).
    pub fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let (_, c, h, w) = input.dims4()?;
        if (c, h, w)
            != (
                self.spec.input_channels,
                self.spec.input_height,
                self.spec.input_width,
            )
        {
            return Err(NnError::ShapeMismatch(format!(
                "network expects {}×{}×{} input, got {c}×{h}×{w}",
                self.spec.input_channels, self.spec.input_height, self.spec.input_width
            )));
        }
        let mut x = input.clone();
        for layer in &mut self.layers {
            x = layer.forward(&x, mode)?;
        }
        Ok(x)
    }

    /// Backpropagate from the logit gradient; parameter gradients accumulate
    /// into each layer's `Param::grad`.
    pub fn backward(&mut self, grad_logits: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let mut g = grad_logits.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    pub fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        for layer in &mut self.layers {
            layer.visit_params(visit);
        }
    }

    pub fn visit_state(&mut self, visit: &mut dyn FnMut(&mut Tensor<S>)) {
        for layer in &mut self.layers {
            layer.visit_state(visit);
        }
    }

    pub fn zero_grads(&mut self) {
        self.visit_params(&mut |p| p.zero_grad());
    }

    /// Give stochastic layers fresh, distinct seeds for the coming batch.
    pub fn reseed(&mut self, seed: u64) {
        for (i, layer) in self.layers.iter_mut().enumerate() {
            layer.reseed(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        }
    }

    /// One RMSProp step over every parameter, in declaration order.
    pub fn apply_gradients(&mut self, cfg: &RmsPropParams) -> Result<(), NnError> {
        let mut result = Ok(());
        self.visit_params(&mut |p| {
            if result.is_ok() {
                result = rmsprop_step(
                    p.value.data_mut(),
                    p.moment.data_mut(),
                    p.grad.data_mut(),
                    cfg,
                );
            }
        });
        result
    }

    pub fn param_count(&mut self) -> usize {
        let mut count = 0;
        self.visit_params(&mut |p| count += p.value.len());
        count
    }
}
