use rayon::prelude::*;

use super::{CsrMatrix, DenseMatrix};
use crate::error::{AmgError, Result};
use crate::vecops::PAR_MIN;

/// Column index stored in padded ELL slots.
pub const PAD: isize = -1;

/// ELLPACK matrix: two `n_rows x width` arrays stored column-major, so
/// slot `t` of row `r` lives at flat offset `t * n_rows + r`.
///
/// Operators built by the hierarchy are square and keep the diagonal in
/// slot 0 ([`EllMatrix::new`] enforces this). [`EllMatrix::general`]
/// accepts any layout and is only meant for plain products.
#[derive(Debug, Clone, PartialEq)]
pub struct EllMatrix {
    n_rows: usize,
    n_cols: usize,
    width: usize,
    col_idx: Vec<isize>,
    values: Vec<f64>,
}

impl EllMatrix {
    /// Square, diagonal-first ELL matrix.
    pub fn new(n_rows: usize, width: usize, col_idx: Vec<isize>, values: Vec<f64>) -> Result<Self> {
        let m = Self::general(n_rows, n_rows, width, col_idx, values)?;
        if width == 0 && n_rows > 0 {
            return Err(AmgError::Structure("diagonal-first ELL needs width >= 1".into()));
        }
        for r in 0..n_rows {
            if m.col_idx[r] != r as isize {
                return Err(AmgError::Structure(format!(
                    "row {r}: slot 0 holds column {} instead of the diagonal",
                    m.col_idx[r]
                )));
            }
        }
        Ok(m)
    }

    /// ELL matrix without the diagonal-first requirement.
    pub fn general(
        n_rows: usize,
        n_cols: usize,
        width: usize,
        col_idx: Vec<isize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let len = n_rows * width;
        if col_idx.len() != len || values.len() != len {
            return Err(AmgError::Size {
                what: "ELL array length",
                expected: len,
                got: col_idx.len().min(values.len()),
            });
        }
        let m = Self {
            n_rows,
            n_cols,
            width,
            col_idx,
            values,
        };
        for r in 0..n_rows {
            let mut seen = Vec::with_capacity(width);
            for t in 0..width {
                let (c, v) = m.slot(r, t);
                if c == PAD {
                    if v != 0.0 {
                        return Err(AmgError::Structure(format!(
                            "row {r} slot {t}: padded slot carries value {v}"
                        )));
                    }
                    continue;
                }
                if c < 0 || c as usize >= n_cols {
                    return Err(AmgError::Structure(format!(
                        "row {r} slot {t}: column {c} out of range"
                    )));
                }
                if seen.contains(&c) {
                    return Err(AmgError::Structure(format!(
                        "row {r}: column {c} stored twice"
                    )));
                }
                seen.push(c);
            }
        }
        Ok(m)
    }

    /// Identity with width 1.
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            width: 1,
            col_idx: (0..n as isize).collect(),
            values: vec![1.0; n],
        }
    }

    /// Converts a CSR matrix, moving each diagonal entry to slot 0 and
    /// keeping the remaining entries in CSR order.
    pub fn from_csr(a: &CsrMatrix, width: usize) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(AmgError::Structure(format!(
                "ELL conversion needs a square matrix, got {}x{}",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let n = a.n_rows();
        let mut col_idx = vec![PAD; n * width];
        let mut values = vec![0.0; n * width];
        for r in 0..n {
            let (cols, vals) = a.row(r);
            if cols.len() > width {
                return Err(AmgError::Capacity {
                    row: r,
                    count: cols.len(),
                    width,
                });
            }
            let diag = cols
                .binary_search(&r)
                .map_err(|_| AmgError::Structure(format!("row {r} has no diagonal entry")))?;
            col_idx[r] = r as isize;
            values[r] = vals[diag];
            let mut t = 1;
            for (k, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                if k == diag {
                    continue;
                }
                col_idx[t * n + r] = c as isize;
                values[t * n + r] = v;
                t += 1;
            }
        }
        Ok(Self {
            n_rows: n,
            n_cols: n,
            width,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Flat column-major offset of logical slot `(r, t)`.
    #[inline]
    pub fn offset(&self, r: usize, t: usize) -> usize {
        t * self.n_rows + r
    }

    #[inline]
    pub fn slot(&self, r: usize, t: usize) -> (isize, f64) {
        let o = self.offset(r, t);
        (self.col_idx[o], self.values[o])
    }

    /// Diagonal entry of row `r` (slot 0 of a diagonal-first matrix).
    #[inline]
    pub fn diag(&self, r: usize) -> f64 {
        self.values[r]
    }

    pub fn col_idx(&self) -> &[isize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of non-padded slots.
    pub fn stored_entries(&self) -> usize {
        self.col_idx.iter().filter(|&&c| c != PAD).count()
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(AmgError::Size {
                what: "ell spmv input",
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n_rows;
        y.par_iter_mut()
            .with_min_len(PAR_MIN)
            .enumerate()
            .for_each(|(r, yr)| {
                let mut s = 0.0;
                for t in 0..self.width {
                    let c = self.col_idx[t * n + r];
                    if c != PAD {
                        s += self.values[t * n + r] * x[c as usize];
                    }
                }
                *yr = s;
            });
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut trip = Vec::with_capacity(self.stored_entries());
        for r in 0..self.n_rows {
            for t in 0..self.width {
                let (c, v) = self.slot(r, t);
                if c != PAD {
                    trip.push((r, c as usize, v));
                }
            }
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &trip).expect("ELL invariants hold")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.to_csr().to_dense()
    }
}
