//! Shared matrix kernels. All variants accumulate into `out` and fix the
//! reduction order per output element, so results are bit-identical at any
//! thread count: parallelism only splits rows of `out`.

use rayon::prelude::*;

use super::tensor::Scalar;

/// Rows below this many output elements are not worth farming out.
const PAR_THRESHOLD: usize = 1 << 14;

/// out[i][j] += Σ_p a[i][p] · b[p][j]  (a: I×P, b: P×J, out: I×J)
pub fn matmul_ab<S: Scalar>(a: &[S], b: &[S], out: &mut [S], i: usize, p: usize, j: usize) {
    debug_assert_eq!(a.len(), i * p);
    debug_assert_eq!(b.len(), p * j);
    debug_assert_eq!(out.len(), i * j);
    let row = |(r, out_row): (usize, &mut [S])| {
        let a_row = &a[r * p..(r + 1) * p];
        for (pp, &av) in a_row.iter().enumerate() {
            let b_row = &b[pp * j..(pp + 1) * j];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    };
    if i * p * j >= PAR_THRESHOLD && i > 1 {
        out.par_chunks_mut(j).enumerate().for_each(row);
    } else {
        out.chunks_mut(j).enumerate().for_each(row);
    }
}

/// out[i][j] += Σ_p a[i][p] · b[j][p]  (a: I×P, b: J×P, out: I×J)
pub fn matmul_abt<S: Scalar>(a: &[S], b: &[S], out: &mut [S], i: usize, j: usize, p: usize) {
    debug_assert_eq!(a.len(), i * p);
    debug_assert_eq!(b.len(), j * p);
    debug_assert_eq!(out.len(), i * j);
    let row = |(r, out_row): (usize, &mut [S])| {
        let a_row = &a[r * p..(r + 1) * p];
        for (c, o) in out_row.iter_mut().enumerate() {
            let b_row = &b[c * p..(c + 1) * p];
            let mut acc = S::zero();
            for (&av, &bv) in a_row.iter().zip(b_row) {
                acc += av * bv;
            }
            *o += acc;
        }
    };
    if i * p * j >= PAR_THRESHOLD && i > 1 {
        out.par_chunks_mut(j).enumerate().for_each(row);
    } else {
        out.chunks_mut(j).enumerate().for_each(row);
    }
}

/// out[i][j] += Σ_p a[p][i] · b[p][j]  (a: P×I, b: P×J, out: I×J)
pub fn matmul_atb<S: Scalar>(a: &[S], b: &[S], out: &mut [S], p: usize, i: usize, j: usize) {
    debug_assert_eq!(a.len(), p * i);
    debug_assert_eq!(b.len(), p * j);
    debug_assert_eq!(out.len(), i * j);
    let row = |(r, out_row): (usize, &mut [S])| {
        for pp in 0..p {
            let av = a[pp * i + r];
            let b_row = &b[pp * j..(pp + 1) * j];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    };
    if i * p * j >= PAR_THRESHOLD && i > 1 {
        out.par_chunks_mut(j).enumerate().for_each(row);
    } else {
        out.chunks_mut(j).enumerate().for_each(row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[f64], b: &[f64], i: usize, p: usize, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; i * j];
        for r in 0..i {
            for c in 0..j {
                for k in 0..p {
                    out[r * j + c] += a[r * p + k] * b[k * j + c];
                }
            }
        }
        out
    }

    fn transpose(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
        let mut t = vec![0.0; m.len()];
        for r in 0..rows {
            for c in 0..cols {
                t[c * rows + r] = m[r * cols + c];
            }
        }
        t
    }

    #[test]
    fn variants_agree_with_naive_product() {
        let (i, p, j) = (7, 5, 11);
        let a: Vec<f64> = (0..i * p).map(|v| (v as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..p * j).map(|v| (v as f64 * 1.3).cos()).collect();
        let expect = naive(&a, &b, i, p, j);

        let mut out = vec![0.0; i * j];
        matmul_ab(&a, &b, &mut out, i, p, j);
        for (x, y) in out.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }

        let mut out = vec![0.0; i * j];
        matmul_abt(&a, &transpose(&b, p, j), &mut out, i, j, p);
        for (x, y) in out.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }

        let mut out = vec![0.0; i * j];
        matmul_atb(&transpose(&a, i, p), &b, &mut out, p, i, j);
        for (x, y) in out.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn accumulates_instead_of_overwriting() {
        let a = [1.0f64, 0.0, 0.0, 1.0];
        let b = [2.0f64, 0.0, 0.0, 2.0];
        let mut out = vec![10.0; 4];
        matmul_ab(&a, &b, &mut out, 2, 2, 2);
        assert_eq!(out, vec![12.0, 10.0, 10.0, 12.0]);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        // Large enough to cross the parallel threshold.
        let (i, p, j) = (64, 33, 129);
        let a: Vec<f32> = (0..i * p).map(|v| ((v * 2654435761) as f32).sin()).collect();
        let b: Vec<f32> = (0..p * j).map(|v| ((v * 40503) as f32).cos()).collect();

        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let mut out = vec![0.0f32; i * j];
                matmul_ab(&a, &b, &mut out, i, p, j);
                out
            })
        };
        let one = run(1);
        let four = run(4);
        assert!(one.iter().zip(&four).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
