//! Discrete Poisson problems on the unit interval/square/cube with
//! homogeneous Dirichlet conditions, and the multigrid hierarchy built from
//! them by Galerkin coarsening.
//!
//! The mesh is the uniform simplicial one (intervals / right triangles with
//! diagonals along (1,1) / Kuhn-subdivided cubes). With the operator scaled
//! by h^(2-d) the finest matrix is the classical stencil with 2d on the
//! diagonal and -1 on the axis neighbours. Prolongation is the canonical
//! injection of the coarse P1 space into the fine one: weight 1 on coarse
//! nodes and 1/2 on every coarse-edge midpoint, which in this mesh family
//! means the fine neighbours along +-1_S for every nonempty axis subset S.
//! Galerkin coarsening then reproduces the coarse-mesh stiffness exactly,
//! so each level sees the same stencil up to a dyadic scale factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, SparseMatrix};

/// Uniform-grid Poisson problem description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    /// Spatial dimension, 1..=3.
    pub dimension: usize,
    /// Number of refinement levels L; the hierarchy has levels 0..=L.
    pub levels: usize,
    /// Cells per side on the coarsest level (interior unknowns per side on
    /// level l are `coarsest_cells * 2^l - 1`).
    pub coarsest_cells: usize,
}

impl ProblemSpec {
    pub fn new(dimension: usize, levels: usize) -> Self {
        ProblemSpec {
            dimension,
            levels,
            coarsest_cells: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::InvalidSpec(format!(
                "dimension {} not in 1..=3",
                self.dimension
            )));
        }
        if self.levels < 1 {
            return Err(Error::InvalidSpec("need at least one level".into()));
        }
        if self.coarsest_cells < 2 {
            return Err(Error::InvalidSpec(
                "coarsest grid needs at least 2 cells per side".into(),
            ));
        }
        Ok(())
    }

    /// Interior unknowns per side on `level`.
    pub fn nodes_per_side(&self, level: usize) -> usize {
        self.coarsest_cells * (1usize << level) - 1
    }

    /// Total interior unknowns on `level`.
    pub fn unknowns(&self, level: usize) -> usize {
        self.nodes_per_side(level).pow(self.dimension as u32)
    }

    /// Classical optimal damped-Jacobi factor for the stencil in this
    /// dimension: 2/3, 4/5, 6/7.
    pub fn default_theta(&self) -> f64 {
        match self.dimension {
            1 => 2.0 / 3.0,
            2 => 4.0 / 5.0,
            _ => 6.0 / 7.0,
        }
    }
}

fn index_of(coords: &[usize], m: usize) -> usize {
    // lexicographic with the x coordinate fastest
    let mut idx = 0;
    for &c in coords.iter().rev() {
        idx = idx * m + c;
    }
    idx
}

/// Stencil matrix (2d on the diagonal, -1 on axis neighbours) for `m`
/// interior nodes per side in `dim` dimensions.
pub fn assemble_stencil(dim: usize, m: usize) -> SparseMatrix {
    let n = m.pow(dim as u32);
    let mut triplets = Vec::with_capacity(n * (2 * dim + 1));
    let mut coords = vec![0usize; dim];
    for idx in 0..n {
        let mut rem = idx;
        for c in coords.iter_mut() {
            *c = rem % m;
            rem /= m;
        }
        triplets.push((idx, idx, 2.0 * dim as f64));
        for axis in 0..dim {
            if coords[axis] > 0 {
                let mut nb = coords.clone();
                nb[axis] -= 1;
                triplets.push((idx, index_of(&nb, m), -1.0));
            }
            if coords[axis] + 1 < m {
                let mut nb = coords.clone();
                nb[axis] += 1;
                triplets.push((idx, index_of(&nb, m), -1.0));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets).expect("stencil triplets are valid")
}

/// Finest-level stiffness matrix for the spec, interior unknowns only.
pub fn assemble_poisson(spec: &ProblemSpec) -> Result<SparseMatrix> {
    spec.validate()?;
    Ok(assemble_stencil(
        spec.dimension,
        spec.nodes_per_side(spec.levels),
    ))
}

/// Canonical P1 injection from `level` to `level + 1`.
///
/// Rows are fine nodes: a fine node whose coordinates are all odd is a
/// coarse node (weight 1); otherwise it is the midpoint of the coarse edge
/// in direction 1_E, E the set of even axes, and receives 1/2 from each
/// endpoint (endpoints on the boundary contribute zero and are dropped).
pub fn build_prolongation(spec: &ProblemSpec, level: usize) -> Result<SparseMatrix> {
    spec.validate()?;
    if level >= spec.levels {
        return Err(Error::InvalidSpec(format!(
            "prolongation level {level} out of range (levels = {})",
            spec.levels
        )));
    }
    let dim = spec.dimension;
    let mc = spec.nodes_per_side(level);
    let mf = spec.nodes_per_side(level + 1);
    let nf = mf.pow(dim as u32);
    let nc = mc.pow(dim as u32);

    let mut row_ptr = Vec::with_capacity(nf + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);

    let mut coords = vec![0usize; dim];
    for f in 0..nf {
        let mut rem = f;
        for c in coords.iter_mut() {
            *c = rem % mf;
            rem /= mf;
        }
        if coords.iter().all(|&c| c % 2 == 1) {
            let cc: Vec<usize> = coords.iter().map(|&c| (c - 1) / 2).collect();
            col_idx.push(index_of(&cc, mc));
            vals.push(1.0);
        } else {
            // endpoints f -+ 1_E in fine coordinates, halved to coarse
            let mut lo_ok = true;
            let mut hi_ok = true;
            let mut lo = vec![0usize; dim];
            let mut hi = vec![0usize; dim];
            for a in 0..dim {
                let c = coords[a];
                if c % 2 == 1 {
                    lo[a] = (c - 1) / 2;
                    hi[a] = lo[a];
                } else {
                    if c == 0 {
                        lo_ok = false;
                    } else {
                        lo[a] = (c - 2) / 2;
                    }
                    if c + 1 == mf {
                        hi_ok = false;
                    } else {
                        hi[a] = c / 2;
                    }
                }
            }
            let mut pair = Vec::with_capacity(2);
            if lo_ok {
                pair.push(index_of(&lo, mc));
            }
            if hi_ok {
                pair.push(index_of(&hi, mc));
            }
            pair.sort_unstable();
            for c in pair {
                col_idx.push(c);
                vals.push(0.5);
            }
        }
        row_ptr.push(col_idx.len());
    }
    SparseMatrix::from_csr(nf, nc, row_ptr, col_idx, vals)
}

/// One level's operator data.
#[derive(Debug, Clone)]
pub struct Level {
    pub a: SparseMatrix,
    /// Diagonal of `a`, cached for the Jacobi smoother.
    pub diag: Vec<f64>,
}

/// The full multigrid state space: per-level operators, transfer operators,
/// smoother data and the cached coarsest-level factorization. Immutable
/// after construction and safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct GridHierarchy {
    pub spec: ProblemSpec,
    levels: Vec<Level>,
    prolongations: Vec<SparseMatrix>,
    restrictions: Vec<SparseMatrix>,
    pub theta: f64,
    coarse_chol: CholeskyFactor,
}

/// Assemble the finest operator and coarsen: A_l = R A_{l+1} P with R = P^T.
pub fn build_hierarchy(spec: &ProblemSpec) -> Result<GridHierarchy> {
    spec.validate()?;
    let lmax = spec.levels;
    let mut mats: Vec<Option<SparseMatrix>> = vec![None; lmax + 1];
    mats[lmax] = Some(assemble_poisson(spec)?);
    let mut prolongations = Vec::with_capacity(lmax);
    let mut restrictions = Vec::with_capacity(lmax);
    for l in 0..lmax {
        let p = build_prolongation(spec, l)?;
        restrictions.push(p.transpose());
        prolongations.push(p);
    }
    for l in (0..lmax).rev() {
        let fine = mats[l + 1].take().expect("fine level assembled");
        let coarse = restrictions[l].matmul(&fine)?.matmul(&prolongations[l])?;
        mats[l + 1] = Some(fine);
        mats[l] = Some(coarse);
    }
    let levels: Vec<Level> = mats
        .into_iter()
        .map(|m| {
            let a = m.expect("all levels assembled");
            let diag = a.diagonal();
            Level { a, diag }
        })
        .collect();
    let coarse_chol = levels[0].a.to_dense().cholesky()?;
    Ok(GridHierarchy {
        spec: *spec,
        levels,
        prolongations,
        restrictions,
        theta: spec.default_theta(),
        coarse_chol,
    })
}

impl GridHierarchy {
    /// Finest level index L.
    pub fn top_level(&self) -> usize {
        self.spec.levels
    }

    pub fn n(&self, level: usize) -> usize {
        self.levels[level].a.nrows()
    }

    pub fn a(&self, level: usize) -> &SparseMatrix {
        &self.levels[level].a
    }

    pub fn jacobi_diag(&self, level: usize) -> &[f64] {
        &self.levels[level].diag
    }

    /// Prolongation from `level` to `level + 1`.
    pub fn p(&self, level: usize) -> &SparseMatrix {
        &self.prolongations[level]
    }

    /// Restriction from `level + 1` to `level`; exact transpose of `p`.
    pub fn r(&self, level: usize) -> &SparseMatrix {
        &self.restrictions[level]
    }

    /// Exact solve on level 0 using the cached Cholesky factorization.
    pub fn coarse_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.coarse_chol.solve(b)
    }

    /// Dense factorization of an arbitrary level, for configurations that
    /// truncate the recursion above level 0.
    pub fn factor_level(&self, level: usize) -> Result<CholeskyFactor> {
        if level == 0 {
            return Ok(self.coarse_chol.clone());
        }
        let n = self.n(level);
        if n > crate::linalg::dense::SYM_EIG_MAX_DIM {
            return Err(Error::SizeGuard {
                context: "dense coarsest-level factorization",
                requested: n,
                limit: crate::linalg::dense::SYM_EIG_MAX_DIM,
            });
        }
        self.levels[level].a.to_dense().cholesky()
    }

    /// Dyadic scale 2^((L-l)(d-2)) relating level l's Galerkin operator to
    /// the unit stencil on its grid.
    pub fn stencil_scale(&self, level: usize) -> f64 {
        let d = self.spec.dimension as i32;
        let diff = (self.spec.levels - level) as i32;
        2f64.powi(diff * (d - 2))
    }
}

pub use crate::linalg::dense::SYM_EIG_MAX_DIM as DENSE_LEVEL_LIMIT;
