use rayon::prelude::*;

use super::DenseMatrix;
use crate::error::{AmgError, Result};
use crate::vecops::PAR_MIN;

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(AmgError::Size {
                what: "row_ptr length",
                expected: n_rows + 1,
                got: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() {
            return Err(AmgError::Size {
                what: "values length",
                expected: col_idx.len(),
                got: values.len(),
            });
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() {
            return Err(AmgError::Structure(
                "row_ptr must start at 0 and end at nnz".into(),
            ));
        }
        for r in 0..n_rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(AmgError::Structure(format!("row_ptr decreases at row {r}")));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            for (t, &c) in cols.iter().enumerate() {
                if c >= n_cols {
                    return Err(AmgError::Structure(format!(
                        "column {c} out of range in row {r}"
                    )));
                }
                if t > 0 && cols[t - 1] >= c {
                    return Err(AmgError::Structure(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// in input order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(AmgError::Structure(format!(
                    "triplet ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
            counts[r + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let mut buckets: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        let mut fill = counts.clone();
        for &(r, c, v) in triplets {
            buckets[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut buckets[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let n = dense.order();
        let mut trip = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = dense.get(r, c);
                if v != 0.0 {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(n, n, &trip).expect("dense entries are in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(t) => vals[t],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|r| self.get(r, r)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when `|a_ij - a_ji| <= rel_tol * max|a|` for all entries.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        let tol = rel_tol * self.max_abs();
        (0..self.n_rows).all(|r| {
            let (cols, vals) = self.row(r);
            cols.iter()
                .zip(vals)
                .all(|(&c, &v)| (v - self.get(c, r)).abs() <= tol)
        })
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(AmgError::Size {
                what: "csr spmv input",
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// Row-parallel product; each row is summed sequentially in storage
    /// order so the result does not depend on the thread count.
    pub(crate) fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut()
            .with_min_len(PAR_MIN)
            .enumerate()
            .for_each(|(r, yr)| {
                let (cols, vals) = self.row(r);
                let mut s = 0.0;
                for (&c, &v) in cols.iter().zip(vals) {
                    s += v * x[c];
                }
                *yr = s;
            });
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows.max(self.n_cols));
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d.set(r, c, v);
            }
        }
        d
    }

    /// Principal submatrix on the given (sorted) index set, as a dense
    /// row-major block.
    pub fn principal_submatrix(&self, idx: &[usize]) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(idx.len());
        for (a, &r) in idx.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Ok(b) = idx.binary_search(&c) {
                    d.set(a, b, v);
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn figure_matrix() -> CsrMatrix {
        CsrMatrix::new(
            3,
            4,
            vec![0, 2, 5, 7],
            vec![0, 1, 0, 1, 2, 2, 3],
            vec![4.0, -2.0, -1.0, 2.0, -1.0, -3.0, 4.0],
        )
        .unwrap()
    }

    #[test]
    fn figure_spmv() {
        let y = figure_matrix().spmv(&[1.0; 4]).unwrap();
        assert_eq!(y, vec![2.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let z = CsrMatrix::from_triplets(5, 5, &[]).unwrap();
        assert_eq!(z.spmv(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5)]).unwrap();
        assert_eq!(m.row(0), (&[0usize, 1][..], &[2.0, 1.5][..]));
        assert_eq!(m.row(1).0.len(), 0);
    }

    #[test]
    fn rejects_bad_structure() {
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(matches!(
            figure_matrix().spmv(&[1.0; 3]),
            Err(AmgError::Size { .. })
        ));
    }

    #[test]
    fn symmetry_check() {
        let s = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]).unwrap();
        assert!(s.is_symmetric(1e-10));
        let n = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0)]).unwrap();
        assert!(!n.is_symmetric(1e-10));
    }
}
