//! Minimal dense/sparse linear-algebra kernels.
//!
//! Everything here is deliberately deterministic: sparse row sums run in
//! ascending column order, dense reductions run in index order. Several
//! tests in this crate assert bitwise equality between independently built
//! execution paths and rely on that.

pub mod dense;
pub mod sparse;
pub mod spectral;

pub use dense::{kron, sqrt_power, sym_eig, symmetric_sqrt, CholeskyFactor, DenseMatrix, SymEig};
pub use sparse::SparseMatrix;
pub use spectral::{spectral_norm, spectral_radius_dense, spectral_radius_growth};

/// Matrix-free operator handle used by the power-iteration estimators.
pub trait LinearOp {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..y.len() {
        y[i] += alpha * x[i];
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}
