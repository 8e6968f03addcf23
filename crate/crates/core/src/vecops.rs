//! Vector kernels shared by the cycle and the smoothers.
//!
//! Reductions split the input into fixed-size chunks, sum each chunk
//! sequentially and then combine the partial sums in chunk order. The
//! result depends only on the input length, never on how many worker
//! threads rayon happens to use.

use rayon::prelude::*;

/// Fixed reduction chunk length.
pub const CHUNK: usize = 2048;

/// Minimum number of elements handed to one rayon task for elementwise maps.
pub(crate) const PAR_MIN: usize = 1024;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    if a.len() <= CHUNK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>())
        .collect();
    partials.iter().sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "axpy: length mismatch");
    y.par_iter_mut()
        .with_min_len(PAR_MIN)
        .zip(x.par_iter())
        .for_each(|(yi, xi)| *yi += alpha * xi);
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "sub: length mismatch");
    a.par_iter()
        .with_min_len(PAR_MIN)
        .zip(b.par_iter())
        .map(|(x, y)| x - y)
        .collect()
}
