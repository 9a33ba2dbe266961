//! Nonsingular M-matrix certificates for the negated Kronecker derivative.
//!
//! For a Z-matrix `K`, a vector `v > 0` with `K·v > 0` certifies that `K` is
//! a nonsingular M-matrix. Solving `K·v = e` and checking `v > 0` is exact in
//! that direction; failure of the solve or a nonpositive component means no
//! certificate was found.

use crate::error::{Error, LinalgError, Result};
use crate::linalg::lu_factor;
use crate::matrix::DenseMatrix;
use crate::qbd::QbdProblem;
use crate::sylvester::{kronecker_operator, vec_col_major, NewtonStepContext, KRONECKER_CAP};

/// Outcome of a certificate attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `v > 0` with `K·v = e`.
    Certified(Vec<f64>),
    /// The solve failed (`None`) or produced a vector that is not strictly positive.
    Failed(Option<Vec<f64>>),
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certificate::Certified(_))
    }

    fn from_solution(v: std::result::Result<Vec<f64>, LinalgError>) -> Self {
        match v {
            Ok(v) if v.iter().all(|&x| x > 0.0) => Certificate::Certified(v),
            Ok(v) => Certificate::Failed(Some(v)),
            Err(_) => Certificate::Failed(None),
        }
    }
}

/// Checks the Z-sign pattern of `k` and attempts the certificate `K·v = e`, `v > 0`.
pub fn zmatrix_certificate(k: &DenseMatrix) -> Result<Certificate> {
    if !k.is_square() {
        return Err(LinalgError::NotSquare {
            rows: k.rows(),
            cols: k.cols(),
        }
        .into());
    }
    let n = k.rows();
    for i in 0..n {
        for j in 0..n {
            if i != j && k[(i, j)] > 0.0 {
                return Err(Error::NotZMatrix {
                    row: i,
                    col: j,
                    value: k[(i, j)],
                });
            }
        }
    }
    let solution = lu_factor(k).and_then(|lu| lu.solve_vec(&vec![1.0; n]));
    Ok(Certificate::from_solution(solution))
}

/// Certificate for `K = −[(Xᵀ ⊗ A + I ⊗ A·X) + I ⊗ B]`, formed explicitly.
///
/// Limited to `n ≤` [`KRONECKER_CAP`].
pub fn mmatrix_certificate(p: &QbdProblem, x: &DenseMatrix) -> Result<Certificate> {
    mmatrix_certificate_capped(p, x, KRONECKER_CAP)
}

pub fn mmatrix_certificate_capped(
    p: &QbdProblem,
    x: &DenseMatrix,
    cap: usize,
) -> Result<Certificate> {
    let mut m = p.a().matmul(x)?;
    m.axpy(1.0, p.b())?;
    let k = kronecker_operator(&m, p.a(), x, cap)?.scale(-1.0);
    zmatrix_certificate(&k)
}

/// The same certificate without forming the `n² × n²` matrix.
///
/// `K·vec(V) = vec(e eᵀ)` is the step equation `M·V + A·V·X = −e eᵀ` with
/// `M = A·X + B`, solved through a [`NewtonStepContext`]. The Z-sign pattern
/// is checked entrywise on the Kronecker structure.
pub fn mmatrix_certificate_structured(p: &QbdProblem, x: &DenseMatrix) -> Result<Certificate> {
    let n = p.dim();
    if x.shape() != (n, n) {
        return Err(LinalgError::DimensionMismatch {
            expected: (n, n),
            found: x.shape(),
        }
        .into());
    }
    let a = p.a();
    let mut m = a.matmul(x)?;
    m.axpy(1.0, p.b())?;
    // Off-diagonal entries of Xᵀ⊗A + I⊗M must be nonnegative.
    // Row (j,k), column (i,l): x_ij·a_kl + δ_ij·m_kl.
    for i in 0..n {
        for j in 0..n {
            let xij = x[(i, j)];
            if i != j {
                if xij < 0.0 {
                    if let Some((k, l)) = first_positive(a) {
                        return Err(not_z(n, j, k, i, l, -(xij * a[(k, l)])));
                    }
                }
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let v = xij * a[(k, l)] + m[(k, l)];
                    if k != l && v < 0.0 {
                        return Err(not_z(n, j, k, i, l, -v));
                    }
                }
            }
        }
    }
    let solution = NewtonStepContext::new(m, a.clone(), x.clone())
        .and_then(|ctx| ctx.solve(&DenseMatrix::filled(n, n, -1.0)));
    match solution {
        Ok(v) => {
            let flat = vec_col_major(&v);
            Ok(Certificate::from_solution(Ok(flat)))
        }
        Err(Error::SingularStepMatrix { .. })
        | Err(Error::Linalg(LinalgError::Singular { .. })) => Ok(Certificate::Failed(None)),
        Err(e) => Err(e),
    }
}

fn first_positive(a: &DenseMatrix) -> Option<(usize, usize)> {
    let n = a.cols();
    a.as_slice()
        .iter()
        .position(|&v| v > 0.0)
        .map(|p| (p / n, p % n))
}

fn not_z(n: usize, j: usize, k: usize, i: usize, l: usize, value: f64) -> Error {
    Error::NotZMatrix {
        row: j * n + k,
        col: i * n + l,
        value,
    }
}
