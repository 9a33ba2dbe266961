//! Solver for the Newton-step equation `M·Z + N·Z·X = E`.
//!
//! With `X = U·T·Uᵀ` in real Schur form and `Y = Z·U`, the equation becomes
//! `M·Y + N·Y·T = E·U`. Because `T` is quasi-upper-triangular, column `j` of
//! `Y` only depends on earlier columns:
//!
//! ```text
//! (M + t_jj·N)·y_j = (E·U)_j − N·Σ_{i<j} t_ij·y_i
//! ```
//!
//! with a coupled `2n × 2n` system for each 2×2 block of `T`. The Schur form
//! and the LU factors of the shifted matrices depend only on the frozen
//! iterate, so a [`NewtonStepContext`] is built once and reused for every
//! right-hand side.

use std::sync::Arc;

use crate::error::{Error, LinalgError, Result};
use crate::linalg::{
    default_max_sweeps, lu_factor, real_schur, LuFactorization, SchurFactorization,
};
use crate::matrix::DenseMatrix;
use crate::qbd::QbdProblem;

/// Largest `n` accepted by the explicit `n² × n²` Kronecker routes.
pub const KRONECKER_CAP: usize = 40;

/// Frozen-derivative solve context for one iterate `X_k`.
#[derive(Debug, Clone)]
pub struct NewtonStepContext {
    m: DenseMatrix,
    n: DenseMatrix,
    schur: SchurFactorization,
    q_t: DenseMatrix,
    /// One factorization per Schur block; blocks sharing a shift share the factor.
    factors: Vec<Arc<LuFactorization>>,
    frozen_x: DenseMatrix,
}

/// Builds the context for the Newton step at `xk`: `M = A·X_k + B`, `N = A`.
pub fn build_step_context(p: &QbdProblem, xk: &DenseMatrix) -> Result<NewtonStepContext> {
    let mut m = p.a().matmul(xk)?;
    m.axpy(1.0, p.b())?;
    NewtonStepContext::new(m, p.a().clone(), xk.clone())
}

impl NewtonStepContext {
    /// Generic context for `M·Z + N·Z·X = E`.
    pub fn new(m: DenseMatrix, n: DenseMatrix, x: DenseMatrix) -> Result<Self> {
        let dim = x.rows();
        for mat in [&m, &n, &x] {
            if mat.shape() != (dim, dim) {
                return Err(LinalgError::DimensionMismatch {
                    expected: (dim, dim),
                    found: mat.shape(),
                }
                .into());
            }
        }
        let schur = real_schur(&x, default_max_sweeps(dim))?;
        let t = &schur.t;
        let mut factors: Vec<Arc<LuFactorization>> = Vec::with_capacity(schur.blocks.len());
        let mut last_shift: Option<(f64, Arc<LuFactorization>)> = None;

        for (block, (k, size)) in schur.block_offsets().into_iter().enumerate() {
            let singular = |source| Error::SingularStepMatrix { block, source };
            if size == 1 {
                let shift = t[(k, k)];
                let lu = match &last_shift {
                    Some((s, lu)) if s.to_bits() == shift.to_bits() => Arc::clone(lu),
                    _ => {
                        let mut shifted = m.clone();
                        shifted.axpy(shift, &n)?;
                        let lu = Arc::new(lu_factor(&shifted).map_err(singular)?);
                        last_shift = Some((shift, Arc::clone(&lu)));
                        lu
                    }
                };
                factors.push(lu);
            } else {
                let coupled = coupled_block_matrix(&m, &n, t, k);
                factors.push(Arc::new(lu_factor(&coupled).map_err(singular)?));
            }
        }

        let q_t = schur.q.transpose();
        Ok(Self {
            m,
            n,
            schur,
            q_t,
            factors,
            frozen_x: x,
        })
    }

    pub fn dim(&self) -> usize {
        self.frozen_x.rows()
    }

    pub fn m(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn n(&self) -> &DenseMatrix {
        &self.n
    }

    pub fn schur(&self) -> &SchurFactorization {
        &self.schur
    }

    pub fn frozen_x(&self) -> &DenseMatrix {
        &self.frozen_x
    }

    pub fn column_factors(&self) -> &[Arc<LuFactorization>] {
        &self.factors
    }

    /// Largest pivot ratio over the cached factors.
    pub fn pivot_ratio(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.pivot_ratio())
            .fold(1.0, f64::max)
    }

    /// Solves `M·Z + N·Z·X_k = E` by columnwise substitution in Schur order.
    pub fn solve(&self, e: &DenseMatrix) -> Result<DenseMatrix> {
        let dim = self.dim();
        if e.shape() != (dim, dim) {
            return Err(LinalgError::DimensionMismatch {
                expected: (dim, dim),
                found: e.shape(),
            }
            .into());
        }
        let t = &self.schur.t;
        // Rows of (E·U)ᵀ are the transformed right-hand-side columns.
        let rhs = self.q_t.matmul(&e.transpose())?;
        // Rows of `y` hold the solved columns y_j.
        let mut y = DenseMatrix::zeros(dim, dim);
        let mut w = vec![0.0; dim];

        for ((k, size), lu) in self.schur.block_offsets().into_iter().zip(&self.factors) {
            if size == 1 {
                let mut r = self.reduced_rhs(&y, &rhs, t, k, &mut w)?;
                lu.solve_in_place(&mut r)?;
                y.row_mut(k).copy_from_slice(&r);
            } else {
                let mut r = self.reduced_rhs(&y, &rhs, t, k, &mut w)?;
                r.extend(self.reduced_rhs(&y, &rhs, t, k + 1, &mut w)?);
                lu.solve_in_place(&mut r)?;
                y.row_mut(k).copy_from_slice(&r[..dim]);
                y.row_mut(k + 1).copy_from_slice(&r[dim..]);
            }
        }
        // Z = Y·Uᵀ = (U·Yᵀ)ᵀ with Yᵀ stored row-wise in `y`.
        Ok(y.transpose().matmul(&self.q_t)?)
    }

    /// `(E·U)_j − N·Σ_{i<k} t_ij·y_i` for column `j`, where `k` starts the block.
    fn reduced_rhs(
        &self,
        y: &DenseMatrix,
        rhs: &DenseMatrix,
        t: &DenseMatrix,
        j: usize,
        w: &mut [f64],
    ) -> Result<Vec<f64>> {
        // Columns inside the current block are coupled, never substituted.
        let block_start = if j > 0 && t[(j, j - 1)] != 0.0 {
            j - 1
        } else {
            j
        };
        w.fill(0.0);
        for i in 0..block_start {
            let tij = t[(i, j)];
            if tij != 0.0 {
                for (acc, &v) in w.iter_mut().zip(y.row(i)) {
                    *acc += tij * v;
                }
            }
        }
        let nw = self.n.matvec(w)?;
        Ok(rhs.row(j).iter().zip(&nw).map(|(r, s)| r - s).collect())
    }
}

fn coupled_block_matrix(
    m: &DenseMatrix,
    n: &DenseMatrix,
    t: &DenseMatrix,
    k: usize,
) -> DenseMatrix {
    let dim = m.rows();
    let (t11, t12, t21, t22) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
    DenseMatrix::from_fn(2 * dim, 2 * dim, |r, c| {
        let (br, i) = (r / dim, r % dim);
        let (bc, j) = (c / dim, c % dim);
        let diag = if br == bc { m[(i, j)] } else { 0.0 };
        // Row block 0 is column k: (M + t11 N) y_k + t21 N y_{k+1}.
        let coeff = match (br, bc) {
            (0, 0) => t11,
            (0, _) => t21,
            (_, 0) => t12,
            _ => t22,
        };
        diag + coeff * n[(i, j)]
    })
}

/// Convenience wrapper around [`NewtonStepContext::solve`].
pub fn solve_step(ctx: &NewtonStepContext, e: &DenseMatrix) -> Result<DenseMatrix> {
    ctx.solve(e)
}

/// The `n² × n²` operator `Xᵀ ⊗ N + I ⊗ M` acting on column-major `vec(Z)`.
pub fn kronecker_operator(
    m: &DenseMatrix,
    n: &DenseMatrix,
    x: &DenseMatrix,
    cap: usize,
) -> Result<DenseMatrix> {
    let dim = x.rows();
    if dim > cap {
        return Err(Error::OracleCapExceeded { n: dim, cap });
    }
    for mat in [m, n, x] {
        if mat.shape() != (dim, dim) {
            return Err(LinalgError::DimensionMismatch {
                expected: (dim, dim),
                found: mat.shape(),
            }
            .into());
        }
    }
    let big = dim * dim;
    Ok(DenseMatrix::from_fn(big, big, |r, c| {
        let (j, k) = (r / dim, r % dim);
        let (i, l) = (c / dim, c % dim);
        let mut v = x[(i, j)] * n[(k, l)];
        if i == j {
            v += m[(k, l)];
        }
        v
    }))
}

pub(crate) fn vec_col_major(z: &DenseMatrix) -> Vec<f64> {
    z.transpose().into_vec()
}

pub(crate) fn unvec_col_major(v: Vec<f64>, dim: usize) -> DenseMatrix {
    DenseMatrix::from_vec(dim, dim, v)
        .expect("length is dim²")
        .transpose()
}

/// Reference solve of `M·Z + N·Z·X = E` through the explicit Kronecker system.
pub fn kronecker_solve(
    m: &DenseMatrix,
    n: &DenseMatrix,
    x: &DenseMatrix,
    e: &DenseMatrix,
) -> Result<DenseMatrix> {
    kronecker_solve_capped(m, n, x, e, KRONECKER_CAP)
}

pub fn kronecker_solve_capped(
    m: &DenseMatrix,
    n: &DenseMatrix,
    x: &DenseMatrix,
    e: &DenseMatrix,
    cap: usize,
) -> Result<DenseMatrix> {
    let op = kronecker_operator(m, n, x, cap)?;
    let dim = x.rows();
    if e.shape() != (dim, dim) {
        return Err(LinalgError::DimensionMismatch {
            expected: (dim, dim),
            found: e.shape(),
        }
        .into());
    }
    let v = lu_factor(&op)?.solve_vec(&vec_col_major(e))?;
    Ok(unvec_col_major(v, dim))
}
