//! QBD coefficient triples and the quadratic map `Q(X) = A·X² + B·X + C`.
//!
//! A problem is accepted when `A`, `B + I` and `C` are nonnegative, the
//! level-independent phase matrix `A + B + I + C` is irreducible, and each of
//! its rows sums to one. Note the row-sum condition includes the identity:
//! that is what makes the phase matrix stochastic and the drift rate
//! `pᵀ(B + I + 2A)e` meaningful.

use std::collections::VecDeque;

use crate::error::{Block, Error, LinalgError, Result, ValidationError};
use crate::linalg::lu_factor;
use crate::matrix::DenseMatrix;

/// Row-sum tolerance used by [`QbdProblem::new`].
pub const DEFAULT_ROW_SUM_TOL: f64 = 1e-12;

/// Validated coefficient triple `(A, B, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QbdProblem {
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
}

impl QbdProblem {
    /// Validates with the default row-sum tolerance.
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix) -> Result<Self, ValidationError> {
        validate_problem(a, b, c, DEFAULT_ROW_SUM_TOL)
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        (self.a, self.b, self.c)
    }

    /// The stochastic phase matrix `A + B + I + C`.
    pub fn phase_matrix(&self) -> DenseMatrix {
        phase_sum(&self.a, &self.b, &self.c)
    }

    fn check_square(&self, x: &DenseMatrix) -> Result<(), LinalgError> {
        let n = self.dim();
        if x.shape() != (n, n) {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, n),
                found: x.shape(),
            });
        }
        Ok(())
    }

    /// `Q(X) = A·X² + B·X + C`, evaluated as `(A·X + B)·X + C`.
    pub fn residual(&self, x: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.check_square(x)?;
        let mut m = self.a.matmul(x)?;
        m.axpy(1.0, &self.b)?;
        let mut q = m.matmul(x)?;
        q.axpy(1.0, &self.c)?;
        Ok(q)
    }

    /// Fréchet derivative of `Q` at `X` applied to `Z`: `A·Z·X + A·X·Z + B·Z`.
    pub fn frechet(&self, x: &DenseMatrix, z: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.check_square(x)?;
        self.check_square(z)?;
        let az = self.a.matmul(z)?;
        let mut out = az.matmul(x)?;
        let mut ax_b = self.a.matmul(x)?;
        ax_b.axpy(1.0, &self.b)?;
        out.axpy(1.0, &ax_b.matmul(z)?)?;
        Ok(out)
    }

    /// Second derivative `A·Z₁·Z₂ + A·Z₂·Z₁` (independent of the base point).
    pub fn second_derivative(
        &self,
        z1: &DenseMatrix,
        z2: &DenseMatrix,
    ) -> Result<DenseMatrix, LinalgError> {
        self.check_square(z1)?;
        self.check_square(z2)?;
        let mut out = self.a.matmul(z1)?.matmul(z2)?;
        out.axpy(1.0, &self.a.matmul(z2)?.matmul(z1)?)?;
        Ok(out)
    }

    /// Normalized residual `‖Q(X)‖ / (‖X‖(‖A‖‖X‖ + ‖B‖) + ‖C‖)` in the ∞-norm.
    pub fn normalized_residual(&self, x: &DenseMatrix) -> Result<f64, LinalgError> {
        let q = self.residual(x)?;
        Ok(self.normalize_residual_norm(q.norm_inf(), x))
    }

    /// Same as [`normalized_residual`](Self::normalized_residual) for a precomputed `‖Q(X)‖∞`.
    ///
    /// An exactly zero residual gives 0 even when the denominator vanishes (`C = 0`, `X = 0`).
    pub fn normalize_residual_norm(&self, residual_norm: f64, x: &DenseMatrix) -> f64 {
        if residual_norm == 0.0 {
            return 0.0;
        }
        let xn = x.norm_inf();
        let denom = xn * (self.a.norm_inf() * xn + self.b.norm_inf()) + self.c.norm_inf();
        residual_norm / denom
    }

    /// Stationary vector of the phase matrix.
    pub fn stationary_vector(&self) -> Result<Vec<f64>> {
        stationary_vector(&self.phase_matrix(), DEFAULT_ROW_SUM_TOL)
    }

    /// Drift rate `ρ = pᵀ(B + I + 2A)e`; `ρ < 1` means positive recurrent.
    pub fn drift_rate(&self) -> Result<f64> {
        let p = self.stationary_vector()?;
        let n = self.dim();
        let row_sums: Vec<f64> = (0..n)
            .map(|i| {
                let b: f64 = self.b.row(i).iter().sum();
                let a: f64 = self.a.row(i).iter().sum();
                b + 1.0 + 2.0 * a
            })
            .collect();
        Ok(p.iter().zip(&row_sums).map(|(pi, r)| pi * r).sum())
    }
}

/// Recurrence class of a QBD chain, decided by its drift rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    PositiveRecurrent,
    NullRecurrent,
    Transient,
}

impl Recurrence {
    /// Classifies `rho`, treating `|rho − 1| ≤ tol` as null recurrent.
    pub fn classify(rho: f64, tol: f64) -> Self {
        if (rho - 1.0).abs() <= tol {
            Recurrence::NullRecurrent
        } else if rho < 1.0 {
            Recurrence::PositiveRecurrent
        } else {
            Recurrence::Transient
        }
    }
}

impl std::fmt::Display for Recurrence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Recurrence::PositiveRecurrent => "positive recurrent",
            Recurrence::NullRecurrent => "null recurrent",
            Recurrence::Transient => "transient",
        })
    }
}

fn phase_sum(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> DenseMatrix {
    let mut p = a.add(b).expect("validated shapes").add_identity(1.0);
    p.axpy(1.0, c).expect("validated shapes");
    p
}

/// Checks the structural invariants and wraps the blocks into a [`QbdProblem`].
pub fn validate_problem(
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
    tol: f64,
) -> Result<QbdProblem, ValidationError> {
    let n = a.rows();
    for (name, m) in [("A", &a), ("B", &b), ("C", &c)] {
        if m.shape() != (n, n) {
            return Err(ValidationError::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    if n == 0 {
        return Err(ValidationError::DimensionMismatch("empty blocks".into()));
    }
    let b_plus_i = b.add_identity(1.0);
    for (block, m) in [(Block::A, &a), (Block::BPlusI, &b_plus_i), (Block::C, &c)] {
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(ValidationError::NonFinite {
                        block,
                        row: i,
                        col: j,
                    });
                }
                if v < 0.0 {
                    return Err(ValidationError::NegativeEntry {
                        block,
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
    }
    let phase = phase_sum(&a, &b, &c);
    for (row, s) in phase.row_sums().into_iter().enumerate() {
        let deviation = s - 1.0;
        if deviation.abs() > tol {
            return Err(ValidationError::RowSumViolation { row, deviation });
        }
    }
    if let Some(closed_set) = reducing_set(&phase) {
        return Err(ValidationError::Reducible { closed_set });
    }
    Ok(QbdProblem { a, b, c })
}

fn reachable(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && edge(i, j) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

/// Returns a proper closed subset of states if the pattern `m > 0` is not
/// strongly connected.
fn reducing_set(m: &DenseMatrix) -> Option<Vec<usize>> {
    let n = m.rows();
    let forward = reachable(n, |i, j| m[(i, j)] > 0.0);
    if forward.iter().any(|&s| !s) {
        // States reachable from 0 cannot leave that set.
        return Some((0..n).filter(|&i| forward[i]).collect());
    }
    let backward = reachable(n, |i, j| m[(j, i)] > 0.0);
    if backward.iter().any(|&s| !s) {
        // States that cannot reach 0 are closed under transitions.
        return Some((0..n).filter(|&i| !backward[i]).collect());
    }
    None
}

/// Stationary vector `p ≥ 0`, `pᵀP = pᵀ`, `Σp = 1` of an irreducible stochastic matrix.
///
/// Solves `(Pᵀ − I)p = 0` with the last equation replaced by the normalization.
pub fn stationary_vector(p: &DenseMatrix, tol: f64) -> Result<Vec<f64>> {
    if !p.is_square() {
        return Err(LinalgError::NotSquare {
            rows: p.rows(),
            cols: p.cols(),
        }
        .into());
    }
    let n = p.rows();
    for (row, s) in p.row_sums().into_iter().enumerate() {
        if (s - 1.0).abs() > tol {
            return Err(ValidationError::RowSumViolation {
                row,
                deviation: s - 1.0,
            }
            .into());
        }
    }
    let mut system = DenseMatrix::from_fn(n, n, |i, j| p[(j, i)] - if i == j { 1.0 } else { 0.0 });
    system.row_mut(n - 1).fill(1.0);
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let lu = lu_factor(&system).map_err(|_| Error::SingularSystem)?;
    lu.solve_in_place(&mut rhs)?;
    Ok(rhs)
}
