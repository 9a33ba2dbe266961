//! LU factorization with partial pivoting.

use crate::error::LinalgError;
use crate::matrix::DenseMatrix;

/// Pivots with magnitude at or below `SINGULAR_RTOL · ‖A‖∞` are treated as zero.
pub const SINGULAR_RTOL: f64 = 1e-14;

/// Packed `P·A = L·U` factors: unit lower `L` below the diagonal, `U` on and above.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactorization {
    lu: DenseMatrix,
    /// `perm[i]` is the row of `A` that ended up in row `i`.
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(a: &DenseMatrix) -> Result<Self, LinalgError> {
        lu_factor(a)
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn packed(&self) -> &DenseMatrix {
        &self.lu
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { self.lu[(i, j)] } else { 0.0 })
    }

    /// Ratio of largest to smallest pivot magnitude; a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..self.dim() {
            let p = self.lu[(i, i)].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        if self.dim() == 0 {
            1.0
        } else {
            hi / lo
        }
    }

    /// Solves `A·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<(), LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, 1),
                found: (b.len(), 1),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(u, y)| u * y)
                .sum();
            x[i] = (x[i] - s) / row[i];
        }
        b.copy_from_slice(&x);
        Ok(())
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Solves `A·X = B` for every column of `B`.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        let n = self.dim();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, b.cols()),
                found: b.shape(),
            });
        }
        let m = b.cols();
        let mut x = DenseMatrix::zeros(n, m);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        // Row-oriented substitution keeps the inner loops contiguous.
        let data = x.as_mut_slice();
        for i in 0..n {
            let (done, rest) = data.split_at_mut(i * m);
            let xi = &mut rest[..m];
            for (k, &l) in self.lu.row(i)[..i].iter().enumerate() {
                if l != 0.0 {
                    for (t, &y) in xi.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                        *t -= l * y;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            let row = self.lu.row(i);
            for (off, &u) in row[i + 1..].iter().enumerate() {
                if u != 0.0 {
                    let k = off;
                    for (t, &y) in xi.iter_mut().zip(&tail[k * m..(k + 1) * m]) {
                        *t -= u * y;
                    }
                }
            }
            let d = row[i];
            for t in xi.iter_mut() {
                *t /= d;
            }
        }
        Ok(x)
    }
}

/// Factors a square matrix with partial (row) pivoting.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactorization, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let threshold = SINGULAR_RTOL * a.norm_inf();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let data = lu.as_mut_slice();

    for k in 0..n {
        let (mut piv, mut best) = (k, data[k * n + k].abs());
        for i in k + 1..n {
            let v = data[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best <= threshold || best == 0.0 {
            return Err(LinalgError::Singular {
                column: k,
                pivot: data[piv * n + k],
            });
        }
        if piv != k {
            for j in 0..n {
                data.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
        }
        let (top, bottom) = data.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..];
        let inv = 1.0 / pivot_row[k];
        for i in 0..n - k - 1 {
            let row = &mut bottom[i * n..(i + 1) * n];
            let l = row[k] * inv;
            row[k] = l;
            if l != 0.0 {
                for (r, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *r -= l * u;
                }
            }
        }
    }
    Ok(LuFactorization { lu, perm })
}

/// One-shot dense solve `A·X = B`.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    lu_factor(a)?.solve_matrix(b)
}
