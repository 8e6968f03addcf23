use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sparse::DenseMatrix;

/// `B B^T + n I` with uniform random `B`.
pub(crate) fn random_spd(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut a = DenseMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let s: f64 = (0..n).map(|k| b[r * n + k] * b[c * n + k]).sum();
            a.set(r, c, s + if r == c { n as f64 } else { 0.0 });
        }
    }
    a
}
