use crate::error::{Error, Result};

use super::LinearOp;

/// Compressed-sparse-row matrix with sorted column indices per row.
///
/// The row-major, column-sorted layout fixes the floating-point summation
/// order of every product, which is what makes the fault-free bitwise
/// equivalence tests meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets. Duplicate entries are summed
    /// in the order they appear; explicit zeros are kept.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidSpec(format!(
                    "triplet ({r}, {c}) out of bounds for {nrows}x{ncols} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let m = SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        };
        m.validate()?;
        Ok(m)
    }

    /// Build directly from CSR arrays (validated).
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        let m = SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Index consistency: monotone row offsets, in-range and strictly
    /// ascending column indices within each row.
    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.nrows + 1
            || self.row_ptr[0] != 0
            || *self.row_ptr.last().unwrap() != self.vals.len()
            || self.col_idx.len() != self.vals.len()
        {
            return Err(Error::InvalidSpec("inconsistent CSR arrays".into()));
        }
        for r in 0..self.nrows {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidSpec(format!(
                    "row offsets not monotone at row {r}"
                )));
            }
            for k in lo..hi {
                if self.col_idx[k] >= self.ncols {
                    return Err(Error::InvalidSpec(format!(
                        "column index {} out of range in row {r}",
                        self.col_idx[k]
                    )));
                }
                if k > lo && self.col_idx[k] <= self.col_idx[k - 1] {
                    return Err(Error::InvalidSpec(format!(
                        "columns not strictly ascending in row {r}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x, summed in ascending column order per row.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "spmv",
                expected: self.ncols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            y[r] = s;
        }
    }

    /// Exact transpose: values are moved bit-for-bit, rows become sorted
    /// columns automatically.
    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut row_ptr = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let dst = row_ptr[c];
                col_idx[dst] = r;
                vals[dst] = self.vals[k];
                row_ptr[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            vals,
        }
    }

    /// C = self * other. Per output row the contributions are accumulated in
    /// ascending k (column of self), so the summation order is reproducible.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                context: "sparse matmul",
                expected: self.ncols,
                got: other.nrows,
            });
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut acc = vec![0.0f64; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.vals[k];
                let mid = self.col_idx[k];
                for j in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[j];
                    if acc[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    acc[c] += a * other.vals[j];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                vals.push(acc[c]);
                acc[c] = 0.0;
            }
            row_ptr[r + 1] = row_ptr[r] + touched.len();
            touched.clear();
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Max abs difference against own transpose; 0.0 means exactly symmetric.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = t.row(r);
            let mut ia = 0;
            let mut ib = 0;
            while ia < ca.len() || ib < cb.len() {
                let (a, b) = match (ca.get(ia), cb.get(ib)) {
                    (Some(&x), Some(&y)) if x == y => {
                        let d = (va[ia], vb[ib]);
                        ia += 1;
                        ib += 1;
                        d
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        let d = (va[ia], 0.0);
                        ia += 1;
                        d
                    }
                    (Some(_), Some(_)) => {
                        let d = (0.0, vb[ib]);
                        ib += 1;
                        d
                    }
                    (Some(_), None) => {
                        let d = (va[ia], 0.0);
                        ia += 1;
                        d
                    }
                    (None, Some(_)) => {
                        let d = (0.0, vb[ib]);
                        ib += 1;
                        d
                    }
                    (None, None) => break,
                };
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d.set(r, c, v);
            }
        }
        d
    }
}

impl LinearOp for SparseMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.vals[k] * xr;
            }
        }
    }
}

/// 1D model stencil, handy in tests all over the crate.
pub fn tridiag(n: usize, lo: f64, diag: f64, hi: f64) -> SparseMatrix {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, lo));
        }
        t.push((i, i, diag));
        if i + 1 < n {
            t.push((i, i + 1, hi));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).expect("tridiag triplets are valid")
}
