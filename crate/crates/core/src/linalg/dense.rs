use crate::error::{Error, Result};

use super::LinearOp;

/// Row-major dense matrix. Used for coarsest solves, iteration-matrix
/// assembly and the tensor-expectation oracles; none of these exceed a few
/// thousand rows, so clarity beats blocking.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    vals: Vec<f64>,
}

/// Result dimension guard for Kronecker products.
pub const KRON_MAX_ENTRIES: usize = 10_000_000;

/// Size guard for the symmetric eigensolver and everything built on it.
pub const SYM_EIG_MAX_DIM: usize = 4096;

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            vals: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(nrows: usize, ncols: usize, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                context: "dense from_rows",
                expected: nrows * ncols,
                got: vals.len(),
            });
        }
        Ok(DenseMatrix { nrows, ncols, vals })
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.vals[r * self.ncols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.vals[r * self.ncols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: f64) {
        self.vals[r * self.ncols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.vals[r * self.ncols..(r + 1) * self.ncols]
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.ncols, self.nrows);
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "dense matvec",
                expected: self.ncols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let row = self.row(r);
            let mut s = 0.0;
            for c in 0..self.ncols {
                s += row[c] * x[c];
            }
            y[r] = s;
        }
        Ok(y)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                context: "dense matmul",
                expected: self.ncols,
                got: other.nrows,
            });
        }
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for r in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.vals[r * other.ncols..(r + 1) * other.ncols];
                for c in 0..other.ncols {
                    dst[c] += a * orow[c];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                context: "dense add",
                expected: self.nrows * self.ncols,
                got: other.nrows * other.ncols,
            });
        }
        let vals = self
            .vals
            .iter()
            .zip(&other.vals)
            .map(|(a, b)| a + b)
            .collect();
        Ok(DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            vals,
        })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            vals: self.vals.iter().map(|v| alpha * v).collect(),
        }
    }

    /// self^k for square matrices (k = 0 gives the identity).
    pub fn pow(&self, k: usize) -> Result<DenseMatrix> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "dense pow",
                expected: self.nrows,
                got: self.ncols,
            });
        }
        let mut out = DenseMatrix::identity(self.nrows);
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Cholesky factorization A = L L^T for symmetric positive definite A.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        CholeskyFactor::new(self)
    }

    /// Solve A x = b via Cholesky; relative residual is at machine level for
    /// the well-conditioned coarse systems this is used on.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.cholesky()?.solve(b)
    }

    /// A^{-1} via Cholesky solves on the identity columns.
    pub fn inverse_spd(&self) -> Result<DenseMatrix> {
        let chol = self.cholesky()?;
        let n = self.nrows;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for c in 0..n {
            e[c] = 1.0;
            let col = chol.solve(&e)?;
            for r in 0..n {
                inv.set(r, c, col[r]);
            }
            e[c] = 0.0;
        }
        Ok(inv)
    }
}

impl LinearOp for DenseMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let r = self.matvec(x).expect("dimension checked by caller");
        y.copy_from_slice(&r);
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            let row = self.row(r);
            for c in 0..self.ncols {
                y[c] += row[c] * xr;
            }
        }
    }
}

/// Cached lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>, // row-major lower triangle, full n*n storage
}

impl CholeskyFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch {
                context: "cholesky",
                expected: a.nrows,
                got: a.ncols,
            });
        }
        let n = a.nrows;
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::NotSpd { pivot: i });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(CholeskyFactor { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "cholesky solve",
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        Ok(y)
    }

    pub fn solve_into(&self, b: &mut [f64]) {
        let n = self.n;
        let l = &self.lower;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= l[k * n + i] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
    }
}

/// Kronecker product with the index convention
/// `(A ⊗ B)[(i*p + k), (j*q + l)] = A[i,j] * B[k,l]` where B is p×q.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let nrows = a.nrows * b.nrows;
    let ncols = a.ncols * b.ncols;
    let entries = nrows.saturating_mul(ncols);
    if entries > KRON_MAX_ENTRIES {
        return Err(Error::SizeGuard {
            context: "kron",
            requested: entries,
            limit: KRON_MAX_ENTRIES,
        });
    }
    let mut out = DenseMatrix::zeros(nrows, ncols);
    for i in 0..a.nrows {
        for j in 0..a.ncols {
            let av = a.get(i, j);
            if av == 0.0 {
                continue;
            }
            for k in 0..b.nrows {
                for l in 0..b.ncols {
                    out.set(i * b.nrows + k, j * b.ncols + l, av * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Symmetric eigendecomposition A = Q diag(w) Q^T by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, same order as `eigenvalues`.
    pub eigenvectors: DenseMatrix,
}

pub fn sym_eig(a: &DenseMatrix) -> Result<SymEig> {
    if a.nrows != a.ncols {
        return Err(Error::DimensionMismatch {
            context: "sym_eig",
            expected: a.nrows,
            got: a.ncols,
        });
    }
    if a.nrows > SYM_EIG_MAX_DIM {
        return Err(Error::SizeGuard {
            context: "sym_eig",
            requested: a.nrows,
            limit: SYM_EIG_MAX_DIM,
        });
    }
    let n = a.nrows;
    let mut m = a.clone();
    let mut q = DenseMatrix::identity(n);

    let off = |m: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m.get(i, j) * m.get(i, j);
                }
            }
        }
        s
    };

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = (1e-14 * scale) * (1e-14 * scale) * n as f64;
    for _sweep in 0..100 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apq = m.get(p, r);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(r, r);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, r);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, r, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(r, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(r, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkq = q.get(k, r);
                    q.set(k, p, c * qkp - s * qkq);
                    q.set(k, r, s * qkp + c * qkq);
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| m.get(i, i)).collect();
    Ok(SymEig {
        eigenvalues,
        eigenvectors: q,
    })
}

/// Principal square root S of a symmetric positive definite A, S·S = A.
///
/// Eigenvalues below `-1e-12 * ||A||` are rejected as non-SPD; tiny negative
/// values inside that band are clamped to zero.
pub fn symmetric_sqrt(a: &DenseMatrix) -> Result<DenseMatrix> {
    sqrt_power(a, 0.5)
}

/// A^p for symmetric positive (semi-)definite A via eigendecomposition.
/// Negative powers reject zero eigenvalues.
pub fn sqrt_power(a: &DenseMatrix, p: f64) -> Result<DenseMatrix> {
    let eig = sym_eig(a)?;
    let n = a.nrows();
    let bound = 1e-12 * a.frobenius_norm();
    let mut lam = Vec::with_capacity(n);
    for (i, &w) in eig.eigenvalues.iter().enumerate() {
        if w < -bound {
            return Err(Error::NotSpd { pivot: i });
        }
        let w = w.max(0.0);
        if w == 0.0 && p < 0.0 {
            return Err(Error::NotSpd { pivot: i });
        }
        lam.push(w.powf(p));
    }
    // Q diag(lam) Q^T
    let q = &eig.eigenvectors;
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += q.get(i, k) * lam[k] * q.get(j, k);
            }
            out.set(i, j, s);
        }
    }
    Ok(out)
}
