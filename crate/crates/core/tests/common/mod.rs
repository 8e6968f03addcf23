#![allow(dead_code)]

use auxamg::{AggregationMap, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major dense copy.
pub fn dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; a.n_cols()]; a.n_rows()];
    for r in 0..a.n_rows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            d[r][c] += v;
        }
    }
    d
}

/// Dense SPD matrix `B B^T + n I` in CSR form.
pub fn random_dense_spd(n: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut trip = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let s: f64 = (0..n).map(|k| b[r * n + k] * b[c * n + k]).sum();
            trip.push((r, c, s + if r == c { n as f64 } else { 0.0 }));
        }
    }
    CsrMatrix::from_triplets(n, n, &trip).unwrap()
}

/// Sparse symmetric, strictly diagonally dominant matrix with positive
/// diagonal (hence SPD).
pub fn random_sparse_spd(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut trip = Vec::new();
    let mut rowsum = vec![0.0; n];
    for r in 0..n {
        for _ in 0..per_row {
            let c = rng.gen_range(0..n);
            if c == r {
                continue;
            }
            let v: f64 = rng.gen_range(-1.0..1.0);
            trip.push((r, c, v));
            trip.push((c, r, v));
            rowsum[r] += v.abs();
            rowsum[c] += v.abs();
        }
    }
    for r in 0..n {
        trip.push((r, r, rowsum[r] + rng.gen_range(0.1..1.0)));
    }
    CsrMatrix::from_triplets(n, n, &trip).unwrap()
}

/// `P^T A P` by explicit dense products with the Boolean `P`.
pub fn dense_galerkin(a: &[Vec<f64>], agg: &AggregationMap) -> Vec<Vec<f64>> {
    let nf = a.len();
    let nc = agg.n_aggregates();
    let mut p = vec![vec![0.0; nc]; nf];
    for (i, &g) in agg.agg_of().iter().enumerate() {
        p[i][g] = 1.0;
    }
    let mut ap = vec![vec![0.0; nc]; nf];
    for i in 0..nf {
        for l in 0..nf {
            if a[i][l] != 0.0 {
                for j in 0..nc {
                    ap[i][j] += a[i][l] * p[l][j];
                }
            }
        }
    }
    let mut c = vec![vec![0.0; nc]; nc];
    for l in 0..nf {
        for r in 0..nc {
            if p[l][r] != 0.0 {
                for q in 0..nc {
                    c[r][q] += p[l][r] * ap[l][q];
                }
            }
        }
    }
    c
}

/// `P^T A P` accumulated entry by entry from the nonzeros of `A`, skipping
/// fine rows flagged inactive.
pub fn triplet_galerkin(a: &CsrMatrix, agg: &AggregationMap, active: &[bool]) -> Vec<Vec<f64>> {
    let nc = agg.n_aggregates();
    let mut c = vec![vec![0.0; nc]; nc];
    for i in 0..a.n_rows() {
        if !active[i] {
            continue;
        }
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if active[j] {
                c[agg.agg_of()[i]][agg.agg_of()[j]] += v;
            }
        }
    }
    c
}

/// Largest `|x - y|` scaled by `max(|y|, floor)`.
pub fn max_rel_diff(x: &[Vec<f64>], y: &[Vec<f64>], floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (rx, ry) in x.iter().zip(y) {
        for (a, b) in rx.iter().zip(ry) {
            worst = worst.max((a - b).abs() / b.abs().max(floor));
        }
    }
    worst
}

pub fn max_abs(x: &[Vec<f64>]) -> f64 {
    x.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Random points inside the unit square.
pub fn random_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect()
}
