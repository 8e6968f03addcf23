use crate::error::{AmgError, Result};

/// LU factors with partial pivoting, `P A = L U`, packed row-major with
/// the unit lower factor below the diagonal.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors a row-major `n x n` array. Fails when a pivot is exactly
    /// zero or below `n * eps * max|a|`.
    pub fn factor(n: usize, a: &[f64]) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * n as f64;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny || pmax == 0.0 {
                return Err(AmgError::Definiteness(format!(
                    "singular matrix: pivot {pmax:e} in column {k}"
                )));
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for r in k + 1..n {
                let l = lu[r * n + k] / piv;
                lu[r * n + k] = l;
                if l != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= l * lu[k * n + c];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }

    /// Rebuilds `A = P^T L U`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let mut pa = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for k in 0..=r.min(c) {
                    let l = if k == r { 1.0 } else { self.lu[r * n + k] };
                    s += l * self.lu[k * n + c];
                }
                pa[r * n + c] = s;
            }
        }
        let mut a = vec![0.0; n * n];
        for (r, &p) in self.perm.iter().enumerate() {
            a[p * n..(p + 1) * n].copy_from_slice(&pa[r * n..(r + 1) * n]);
        }
        a
    }
}

/// Square dense matrix with an optional LU slot.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    entries: Vec<f64>,
    lu: Option<LuFactors>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
            lu: None,
        }
    }

    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(AmgError::Size {
                what: "dense entries",
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(Self {
            n,
            entries,
            lu: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Self::zeros(n);
        for i in 0..n {
            d.set(i, i, 1.0);
        }
        d
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.n + c]
    }

    /// Writes an entry and discards any stale factorization.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.entries[r * self.n + c] = v;
        self.lu = None;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|r| {
                self.entries[r * self.n..(r + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn factor(&mut self) -> Result<()> {
        self.lu = Some(LuFactors::factor(self.n, &self.entries)?);
        Ok(())
    }

    pub fn factors(&self) -> Option<&LuFactors> {
        self.lu.as_ref()
    }

    pub fn is_factored(&self) -> bool {
        self.lu.is_some()
    }

    /// Solves with the stored factorization.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n {
            return Err(AmgError::Size {
                what: "dense solve rhs",
                expected: self.n,
                got: f.len(),
            });
        }
        let lu = self
            .lu
            .as_ref()
            .ok_or_else(|| AmgError::Definiteness("dense matrix has no factorization".into()))?;
        Ok(lu.solve(f))
    }
}
