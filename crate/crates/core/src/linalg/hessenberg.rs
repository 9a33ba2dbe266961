//! Householder reduction to upper Hessenberg form.

use crate::error::LinalgError;
use crate::matrix::DenseMatrix;

/// Returns `(Q, H)` with `A = Q·H·Qᵀ`, `Q` orthogonal and `H` upper Hessenberg.
///
/// Columns that already have zeros below the subdiagonal are left untouched,
/// so a Hessenberg input comes back bit-identical with `Q = I`.
pub fn hessenberg(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix), LinalgError> {
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
    let mut h = a.clone();
    let mut q = DenseMatrix::identity(n);
    let mut v = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        if (k + 2..n).all(|i| h[(i, k)] == 0.0) {
            continue;
        }
        let alpha_sq: f64 = (k + 1..n).map(|i| h[(i, k)] * h[(i, k)]).sum();
        let norm = alpha_sq.sqrt();
        let x0 = h[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        // v = x − α e₁, P = I − β v vᵀ
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vnorm_sq = v[k + 1] * v[k + 1] + (alpha_sq - x0 * x0);
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        let vk = &v[k + 1..n];

        // H ← P·H on rows k+1.., columns k..
        for j in k..n {
            let s: f64 = vk
                .iter()
                .enumerate()
                .map(|(t, &vi)| vi * h[(k + 1 + t, j)])
                .sum();
            let s = beta * s;
            for (t, &vi) in vk.iter().enumerate() {
                h[(k + 1 + t, j)] -= s * vi;
            }
        }
        // H ← H·P on all rows, columns k+1..
        for i in 0..n {
            let row = &mut h.row_mut(i)[k + 1..n];
            let s: f64 = beta * row.iter().zip(vk).map(|(x, y)| x * y).sum::<f64>();
            for (x, &vi) in row.iter_mut().zip(vk) {
                *x -= s * vi;
            }
        }
        // Q ← Q·P
        for i in 0..n {
            let row = &mut q.row_mut(i)[k + 1..n];
            let s: f64 = beta * row.iter().zip(vk).map(|(x, y)| x * y).sum::<f64>();
            for (x, &vi) in row.iter_mut().zip(vk) {
                *x -= s * vi;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    Ok((q, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::{orthogonality_error, random_matrix, reconstruct};

    #[test]
    fn one_by_one_is_unchanged() {
        let a = DenseMatrix::from_rows(&[[3.5]]).unwrap();
        let (q, h) = hessenberg(&a).unwrap();
        assert_eq!(h, a);
        assert_eq!(q, DenseMatrix::identity(1));
    }

    #[test]
    fn hessenberg_input_is_fixed_point() {
        let mut a = random_matrix(8, 5);
        for i in 0..8 {
            for j in 0..8 {
                if i > j + 1 {
                    a[(i, j)] = 0.0;
                }
            }
        }
        let (q, h) = hessenberg(&a).unwrap();
        assert_eq!(h, a);
        assert_eq!(q, DenseMatrix::identity(8));
    }

    #[test]
    fn random_reconstruction_and_structure() {
        let a = random_matrix(20, 99);
        let (q, h) = hessenberg(&a).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                if i > j + 1 {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
        assert!(orthogonality_error(&q) <= 1e-12);
        let err = reconstruct(&q, &h).max_abs_diff(&a).unwrap();
        assert!(err <= 1e-12 * a.norm_inf(), "err = {err}");
    }
}
