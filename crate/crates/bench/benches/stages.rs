//! Wall-clock cost of the pipeline's hot stages at production sizes:
//! painting a full-genome motif, one SUSAN pass over it, and the stem
//! convolution's forward and backward kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use genomotif_core::nn::{conv2d_backward, conv2d_forward, Tensor};
use genomotif_core::rasterizer::{rasterize_with_order, FillOrder};
use genomotif_core::susan::{susan_edges, to_grayscale};
use genomotif_core::{FillMode, MotifGeometry, SusanParams};

/// Deterministic pseudo-genome long enough to fill a 200x200 canvas.
fn synthetic_bases(len: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..len).map(|_| b"ACGT"[rng.random_range(0..4)] as char).collect()
}

fn tensor(shape: &[usize], seed: u64) -> Tensor<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = shape.iter().product();
    let data = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::from_vec(shape, data).unwrap()
}

fn bench_rasterize(c: &mut Criterion) {
    let geometry = MotifGeometry::square(200, FillMode::Rings).unwrap();
    let order = FillOrder::new(geometry);
    let bases = synthetic_bases(30_000);
    c.bench_function("rasterize_200px", |b| {
        b.iter(|| rasterize_with_order(black_box(&bases), &order, "bench"))
    });
}

fn bench_susan(c: &mut Criterion) {
    let geometry = MotifGeometry::square(200, FillMode::Rings).unwrap();
    let order = FillOrder::new(geometry);
    let motif = rasterize_with_order(&synthetic_bases(30_000), &order, "bench");
    let gray = to_grayscale(&motif.image);
    let params = SusanParams::default();
    c.bench_function("susan_200px", |b| {
        b.iter(|| susan_edges(black_box(&gray), &params))
    });
}

fn bench_conv(c: &mut Criterion) {
    // The stem at training shape: 8x3x200x200 through a 16-filter 3x3.
    let input = tensor(&[8, 3, 200, 200], 1);
    let weights = tensor(&[16, 3, 3, 3], 2);
    let bias = vec![0.0f32; 16];
    c.bench_function("conv_stem_forward", |b| {
        b.iter(|| conv2d_forward(black_box(&input), &weights, &bias, 2, 1).unwrap())
    });

    let output = conv2d_forward(&input, &weights, &bias, 2, 1).unwrap();
    let grad_out = tensor(output.shape(), 3);
    c.bench_function("conv_stem_backward", |b| {
        b.iter(|| conv2d_backward(black_box(&input), &weights, 2, 1, &grad_out).unwrap())
    });
}

criterion_group!(benches, bench_rasterize, bench_susan, bench_conv);
criterion_main!(benches);
