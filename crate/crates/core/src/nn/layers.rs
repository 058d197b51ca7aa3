//! Stateful layer objects over the functional kernels: parameter storage,
//! forward caches, and the composite dense-block / transition layers.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::batchnorm::{batchnorm_backward, batchnorm_eval, batchnorm_train, BnBatchStats};
use super::conv::{conv2d_backward, conv2d_forward, conv_out_dim};
use super::dense::{dense_backward, dense_forward};
use super::dropout::{dropout_backward, dropout_train};
use super::pool::{
    avg_pool2_backward, avg_pool2_forward, global_avg_pool_backward, global_avg_pool_forward,
};
use super::relu::{relu_backward, relu_forward};
use super::tensor::{concat_channels, split_channels, Scalar, Tensor};
use super::NnError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// A trainable tensor with its gradient and RMSProp moment, all one shape.
#[derive(Clone, Debug)]
pub struct Param<S> {
    pub value: Tensor<S>,
    pub grad: Tensor<S>,
    pub moment: Tensor<S>,
}

impl<S: Scalar> Param<S> {
    pub fn new(value: Tensor<S>) -> Self {
        let grad = Tensor::zeros(value.shape());
        let moment = Tensor::zeros(value.shape());
        Param { value, grad, moment }
    }

    pub fn zero_grad(&mut self) {
        for g in self.grad.data_mut() {
            *g = S::zero();
        }
    }
}

/// A differentiable stage of the network.
///
/// `backward` consumes the cache left by the most recent `forward` in
/// Train mode; calling it without one is a bug and panics. Visitors walk
/// tensors in declaration order, which is also the checkpoint order.
pub trait Layer<S: Scalar>: Send {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError>;
    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError>;

    fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        let _ = visit;
    }

    /// Non-trainable persistent state (running statistics).
    fn visit_state(&mut self, visit: &mut dyn FnMut(&mut Tensor<S>)) {
        let _ = visit;
    }

    /// Refresh per-batch randomness; only stochastic layers care.
    fn reseed(&mut self, seed: u64) {
        let _ = seed;
    }

    fn kind(&self) -> &'static str;
}

const NO_CACHE: &str = "backward requires a preceding train-mode forward";

fn he_normal<S: Scalar>(shape: &[usize], fan_in: usize, rng: &mut ChaCha8Rng) -> Tensor<S> {
    let std = (2.0 / fan_in as f64).sqrt();
    let dist = Normal::new(0.0, std).expect("std is finite");
    let data = (0..shape.iter().product::<usize>())
        .map(|_| S::from_f64(dist.sample(rng)))
        .collect();
    Tensor::from_vec(shape, data).expect("shape matches count")
}

// ---------------------------------------------------------------- Conv2d

pub struct Conv2d<S> {
    pub weights: Param<S>,
    pub bias: Param<S>,
    stride: usize,
    pad: usize,
    cache: Option<Tensor<S>>,
}

impl<S: Scalar> Conv2d<S> {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let fan_in = in_channels * kernel * kernel;
        Conv2d {
            weights: Param::new(he_normal(
                &[out_channels, in_channels, kernel, kernel],
                fan_in,
                rng,
            )),
            bias: Param::new(Tensor::zeros(&[out_channels])),
            stride,
            pad,
            cache: None,
        }
    }

    pub fn out_spatial(&self, h: usize, w: usize) -> (usize, usize) {
        let k = self.weights.value.shape()[2];
        (
            conv_out_dim(h, k, self.stride, self.pad),
            conv_out_dim(w, k, self.stride, self.pad),
        )
    }
}

impl<S: Scalar> Layer<S> for Conv2d<S> {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let out = conv2d_forward(
            input,
            &self.weights.value,
            self.bias.value.data(),
            self.stride,
            self.pad,
        )?;
        if mode == Mode::Train {
            self.cache = Some(input.clone());
        }
        Ok(out)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let input = self.cache.take().expect(NO_CACHE);
        let grads = conv2d_backward(&input, &self.weights.value, self.stride, self.pad, grad_out)?;
        self.weights.grad.add_assign(&grads.weights)?;
        for (g, &v) in self.bias.grad.data_mut().iter_mut().zip(&grads.bias) {
            *g += v;
        }
        Ok(grads.input)
    }

    fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        visit(&mut self.weights);
        visit(&mut self.bias);
    }

    fn kind(&self) -> &'static str {
        "conv"
    }
}

// ------------------------------------------------------------- BatchNorm

pub struct BatchNorm<S> {
    pub gamma: Param<S>,
    pub beta: Param<S>,
    pub running_mean: Tensor<S>,
    pub running_var: Tensor<S>,
    momentum: f64,
    eps: f64,
    cache: Option<(Tensor<S>, BnBatchStats<S>)>,
}

impl<S: Scalar> BatchNorm<S> {
    pub fn new(channels: usize) -> Self {
        let mut gamma = Tensor::zeros(&[channels]);
        for v in gamma.data_mut() {
            *v = S::one();
        }
        let mut running_var = Tensor::zeros(&[channels]);
        for v in running_var.data_mut() {
            *v = S::one();
        }
        BatchNorm {
            gamma: Param::new(gamma),
            beta: Param::new(Tensor::zeros(&[channels])),
            running_mean: Tensor::zeros(&[channels]),
            running_var,
            momentum: 0.9,
            eps: 1e-5,
            cache: None,
        }
    }
}

impl<S: Scalar> Layer<S> for BatchNorm<S> {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        match mode {
            Mode::Train => {
                let (out, stats) =
                    batchnorm_train(input, self.gamma.value.data(), self.beta.value.data(), self.eps)?;
                let m = S::from_f64(self.momentum);
                let one_minus = S::from_f64(1.0 - self.momentum);
                for (r, &b) in self.running_mean.data_mut().iter_mut().zip(&stats.mean) {
                    *r = m * *r + one_minus * b;
                }
                for (r, &b) in self.running_var.data_mut().iter_mut().zip(&stats.var) {
                    *r = m * *r + one_minus * b;
                }
                self.cache = Some((input.clone(), stats));
                Ok(out)
            }
            Mode::Eval => batchnorm_eval(
                input,
                self.gamma.value.data(),
                self.beta.value.data(),
                self.running_mean.data(),
                self.running_var.data(),
                self.eps,
            ),
        }
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let (input, stats) = self.cache.take().expect(NO_CACHE);
        let (dx, dgamma, dbeta) =
            batchnorm_backward(&input, self.gamma.value.data(), &stats, self.eps, grad_out)?;
        for (g, &v) in self.gamma.grad.data_mut().iter_mut().zip(&dgamma) {
            *g += v;
        }
        for (g, &v) in self.beta.grad.data_mut().iter_mut().zip(&dbeta) {
            *g += v;
        }
        Ok(dx)
    }

    fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        visit(&mut self.gamma);
        visit(&mut self.beta);
    }

    fn visit_state(&mut self, visit: &mut dyn FnMut(&mut Tensor<S>)) {
        visit(&mut self.running_mean);
        visit(&mut self.running_var);
    }

    fn kind(&self) -> &'static str {
        "batchnorm"
    }
}

// ------------------------------------------------------------------ Relu

#[derive(Default)]
pub struct Relu<S> {
    cache: Option<Tensor<S>>,
}

impl<S: Scalar> Relu<S> {
    pub fn new() -> Self {
        Relu { cache: None }
    }
}

impl<S: Scalar> Layer<S> for Relu<S> {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let out = relu_forward(input);
        if mode == Mode::Train {
            self.cache = Some(out.clone());
        }
        Ok(out)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let output = self.cache.take().expect(NO_CACHE);
        relu_backward(&output, grad_out)
    }

    fn kind(&self) -> &'static str {
        "relu"
    }
}

// ----------------------------------------------------------------- Pools

#[derive(Default)]
pub struct AvgPool2 {
    cache_shape: Option<Vec<usize>>,
}

impl AvgPool2 {
    pub fn new() -> Self {
        AvgPool2 { cache_shape: None }
    }
}

impl<S: Scalar> Layer<S> for AvgPool2 {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let out = avg_pool2_forward(input)?;
        if mode == Mode::Train {
            self.cache_shape = Some(input.shape().to_vec());
        }
        Ok(out)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let shape = self.cache_shape.take().expect(NO_CACHE);
        avg_pool2_backward(&shape, grad_out)
    }

    fn kind(&self) -> &'static str {
        "avgpool"
    }
}

#[derive(Default)]
pub struct GlobalAvgPool {
    cache_shape: Option<Vec<usize>>,
}

impl GlobalAvgPool {
    pub fn new() -> Self {
        GlobalAvgPool { cache_shape: None }
    }
}

impl<S: Scalar> Layer<S> for GlobalAvgPool {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let out = global_avg_pool_forward(input)?;
        if mode == Mode::Train {
            self.cache_shape = Some(input.shape().to_vec());
        }
        Ok(out)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let shape = self.cache_shape.take().expect(NO_CACHE);
        global_avg_pool_backward(&shape, grad_out)
    }

    fn kind(&self) -> &'static str {
        "globalavgpool"
    }
}

// --------------------------------------------------------------- Dropout

pub struct Dropout {
    rate: f64,
    seed: u64,
    cache: Option<Vec<bool>>,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        Dropout {
            rate,
            seed: 0,
            cache: None,
        }
    }
}

impl<S: Scalar> Layer<S> for Dropout {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        match mode {
            Mode::Train => {
                let (out, mask) = dropout_train(input, self.rate, self.seed)?;
                self.cache = Some(mask);
                Ok(out)
            }
            Mode::Eval => Ok(input.clone()),
        }
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let mask = self.cache.take().expect(NO_CACHE);
        dropout_backward(&mask, self.rate, grad_out)
    }

    fn reseed(&mut self, seed: u64) {
        self.seed = seed;
    }

    fn kind(&self) -> &'static str {
        "dropout"
    }
}

// ----------------------------------------------------------------- Dense

pub struct Dense<S> {
    pub weights: Param<S>,
    pub bias: Param<S>,
    cache: Option<Tensor<S>>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Self {
        Dense {
            weights: Param::new(he_normal(&[out_features, in_features], in_features, rng)),
            bias: Param::new(Tensor::zeros(&[out_features])),
            cache: None,
        }
    }
}

impl<S: Scalar> Layer<S> for Dense<S> {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let out = dense_forward(input, &self.weights.value, self.bias.value.data())?;
        if mode == Mode::Train {
            self.cache = Some(input.clone());
        }
        Ok(out)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let input = self.cache.take().expect(NO_CACHE);
        let (dx, dw, db) = dense_backward(&input, &self.weights.value, grad_out)?;
        self.weights.grad.add_assign(&dw)?;
        for (g, &v) in self.bias.grad.data_mut().iter_mut().zip(&db) {
            *g += v;
        }
        Ok(dx)
    }

    fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        visit(&mut self.weights);
        visit(&mut self.bias);
    }

    fn kind(&self) -> &'static str {
        "dense"
    }
}

// ------------------------------------------------------------ DenseBlock

struct DenseUnit<S> {
    bn: BatchNorm<S>,
    relu: Relu<S>,
    conv: Conv2d<S>,
}

/// Densely connected block: each unit runs BN → ReLU → 3×3 conv (stride 1,
/// pad 1) on the concatenation of the block input and every earlier unit's
/// output, then appends its `growth` channels. With L units the block wires
/// L·(L+1)/2 producer→consumer connections and adds L·growth channels.
pub struct DenseBlock<S> {
    units: Vec<DenseUnit<S>>,
    growth: usize,
}

impl<S: Scalar> DenseBlock<S> {
    pub fn new(in_channels: usize, layers: usize, growth: usize, rng: &mut ChaCha8Rng) -> Self {
        let units = (0..layers)
            .map(|i| {
                let c = in_channels + i * growth;
                DenseUnit {
                    bn: BatchNorm::new(c),
                    relu: Relu::new(),
                    conv: Conv2d::new(c, growth, 3, 1, 1, rng),
                }
            })
            .collect();
        DenseBlock { units, growth }
    }

    pub fn out_channels(&self, in_channels: usize) -> usize {
        in_channels + self.units.len() * self.growth
    }
}

impl<S: Scalar> Layer<S> for DenseBlock<S> {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let mut state = input.clone();
        for unit in &mut self.units {
            let normed = unit.bn.forward(&state, mode)?;
            let active = unit.relu.forward(&normed, mode)?;
            let fresh = unit.conv.forward(&active, mode)?;
            state = concat_channels(&state, &fresh)?;
        }
        Ok(state)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let mut grad_state = grad_out.clone();
        for unit in self.units.iter_mut().rev() {
            let (_, c, _, _) = grad_state.dims4()?;
            let (grad_prev, grad_fresh) = split_channels(&grad_state, c - self.growth)?;
            let grad_active = unit.conv.backward(&grad_fresh)?;
            let grad_normed = unit.relu.backward(&grad_active)?;
            let grad_input = unit.bn.backward(&grad_normed)?;
            grad_state = grad_prev;
            grad_state.add_assign(&grad_input)?;
        }
        Ok(grad_state)
    }

    fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        for unit in &mut self.units {
            unit.bn.visit_params(visit);
            unit.conv.visit_params(visit);
        }
    }

    fn visit_state(&mut self, visit: &mut dyn FnMut(&mut Tensor<S>)) {
        for unit in &mut self.units {
            Layer::<S>::visit_state(&mut unit.bn, visit);
        }
    }

    fn kind(&self) -> &'static str {
        "denseblock"
    }
}

// ------------------------------------------------------------ Transition

/// Between-block compression: BN → 1×1 conv (no activation) → 2×2 average
/// pooling.
pub struct Transition<S> {
    bn: BatchNorm<S>,
    conv: Conv2d<S>,
    pool: AvgPool2,
}

impl<S: Scalar> Transition<S> {
    pub fn new(in_channels: usize, out_channels: usize, rng: &mut ChaCha8Rng) -> Self {
        Transition {
            bn: BatchNorm::new(in_channels),
            conv: Conv2d::new(in_channels, out_channels, 1, 1, 0, rng),
            pool: AvgPool2::new(),
        }
    }
}

impl<S: Scalar> Layer<S> for Transition<S> {
    fn forward(&mut self, input: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, NnError> {
        let normed = self.bn.forward(input, mode)?;
        let compressed = self.conv.forward(&normed, mode)?;
        self.pool.forward(&compressed, mode)
    }

    fn backward(&mut self, grad_out: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        let grad_compressed = Layer::<S>::backward(&mut self.pool, grad_out)?;
        let grad_normed = self.conv.backward(&grad_compressed)?;
        self.bn.backward(&grad_normed)
    }

    fn visit_params(&mut self, visit: &mut dyn FnMut(&mut Param<S>)) {
        self.bn.visit_params(visit);
        self.conv.visit_params(visit);
    }

    fn visit_state(&mut self, visit: &mut dyn FnMut(&mut Tensor<S>)) {
        Layer::<S>::visit_state(&mut self.bn, visit);
    }

    fn kind(&self) -> &'static str {
        "transition"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn ramp(shape: &[usize]) -> Tensor<f64> {
        let len: usize = shape.iter().product();
        Tensor::from_vec(shape, (0..len).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap()
    }

    #[test]
    fn dense_block_appends_growth_channels() {
        let mut block = DenseBlock::<f64>::new(6, 4, 3, &mut rng());
        let x = ramp(&[2, 6, 8, 8]);
        let y = block.forward(&x, Mode::Train).unwrap();
        assert_eq!(y.shape(), &[2, 18, 8, 8]); // 6 + 4·3
        assert_eq!(block.out_channels(6), 18);
        // The block input passes through unchanged as the first channels.
        assert_eq!(&y.data()[0..6 * 64], &x.data()[0..6 * 64]);

        let g = ramp(&[2, 18, 8, 8]);
        let dx = block.backward(&g).unwrap();
        assert_eq!(dx.shape(), x.shape());
    }

    #[test]
    fn dense_block_unit_inputs_grow_linearly() {
        // Unit i consumes in + i·growth channels: the dense wiring, with
        // L(L+1)/2 producer→consumer edges in total.
        let mut block = DenseBlock::<f32>::new(16, 4, 8, &mut rng());
        let mut conv_in_channels = Vec::new();
        block.visit_params(&mut |p| {
            if p.value.shape().len() == 4 {
                conv_in_channels.push(p.value.shape()[1]);
            }
        });
        assert_eq!(conv_in_channels, vec![16, 24, 32, 40]);
        let edges: usize = (1..=4).sum();
        assert_eq!(edges, 4 * 5 / 2);
    }

    #[test]
    fn transition_halves_channels_and_spatial_dims() {
        let mut t = Transition::<f64>::new(10, 5, &mut rng());
        let x = ramp(&[2, 10, 12, 12]);
        let y = t.forward(&x, Mode::Train).unwrap();
        assert_eq!(y.shape(), &[2, 5, 6, 6]);
        let dx = t.backward(&ramp(&[2, 5, 6, 6])).unwrap();
        assert_eq!(dx.shape(), x.shape());
    }

    #[test]
    fn param_and_state_counts() {
        let mut block = DenseBlock::<f32>::new(8, 3, 4, &mut rng());
        let mut params = 0;
        block.visit_params(&mut |_| params += 1);
        assert_eq!(params, 3 * 4); // per unit: γ, β, conv W, conv b
        let mut state = 0;
        Layer::<f32>::visit_state(&mut block, &mut |_| state += 1);
        assert_eq!(state, 3 * 2); // per unit: running mean + var
    }

    #[test]
    fn batchnorm_running_stats_move_toward_batch() {
        let mut bn = BatchNorm::<f64>::new(1);
        let x = Tensor::from_vec(&[4, 1, 1, 1], vec![4.0, 6.0, 4.0, 6.0]).unwrap();
        bn.forward(&x, Mode::Train).unwrap();
        // mean 5, var 1: running = 0.9·init + 0.1·batch.
        assert!((bn.running_mean.data()[0] - 0.5).abs() < 1e-12);
        assert!((bn.running_var.data()[0] - (0.9 + 0.1)).abs() < 1e-12);

        // Eval now uses the blended stats, not the batch stats.
        let y = bn.forward(&x, Mode::Eval).unwrap();
        let inv = 1.0 / (1.0f64 + 1e-5).sqrt();
        assert!((y.data()[0] - (4.0 - 0.5) * inv).abs() < 1e-9);
    }

    #[test]
    fn dropout_reseed_changes_mask() {
        let mut d = Dropout::new(0.5);
        let x = Tensor::<f32>::from_vec(&[256], vec![1.0; 256]).unwrap();
        Layer::<f32>::reseed(&mut d, 1);
        let a = Layer::<f32>::forward(&mut d, &x, Mode::Train).unwrap();
        Layer::<f32>::reseed(&mut d, 1);
        let b = Layer::<f32>::forward(&mut d, &x, Mode::Train).unwrap();
        assert_eq!(a.data(), b.data());
        Layer::<f32>::reseed(&mut d, 2);
        let c = Layer::<f32>::forward(&mut d, &x, Mode::Train).unwrap();
        assert_ne!(a.data(), c.data());
        // Eval is identity regardless of seed.
        let e = Layer::<f32>::forward(&mut d, &x, Mode::Eval).unwrap();
        assert_eq!(e.data(), x.data());
    }

    #[test]
    fn conv_layer_accumulates_gradients_across_backwards() {
        let mut conv = Conv2d::<f64>::new(2, 3, 3, 1, 1, &mut rng());
        let x = ramp(&[2, 2, 5, 5]);
        let g = ramp(&[2, 3, 5, 5]);
        conv.forward(&x, Mode::Train).unwrap();
        conv.backward(&g).unwrap();
        let first: Vec<f64> = conv.weights.grad.data().to_vec();
        conv.forward(&x, Mode::Train).unwrap();
        conv.backward(&g).unwrap();
        for (twice, once) in conv.weights.grad.data().iter().zip(&first) {
            assert!((twice - 2.0 * once).abs() < 1e-12);
        }
        conv.visit_params(&mut |p| p.zero_grad());
        assert!(conv.weights.grad.data().iter().all(|&v| v == 0.0));
    }
}
