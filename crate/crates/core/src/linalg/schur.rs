//! Real Schur decomposition by Francis implicit double-shift QR.
//!
//! The input is first reduced to Hessenberg form; the QR sweeps then act on
//! the whole matrix (not just the active window) so that `T` is the full
//! quasi-triangular factor and `Q` accumulates every similarity.

use super::hessenberg::hessenberg;
use crate::error::LinalgError;
use crate::matrix::DenseMatrix;

/// Relative deflation threshold for subdiagonal entries.
pub const DEFLATION_TOL: f64 = 1e-14;

/// Stalled sweeps on one window before an exceptional shift is used.
const EXCEPTIONAL_PERIOD: usize = 10;

/// `A = Q·T·Qᵀ` with `T` quasi-upper-triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurFactorization {
    pub q: DenseMatrix,
    pub t: DenseMatrix,
    /// Sizes of the diagonal blocks of `T` in order; each is 1 or 2.
    pub blocks: Vec<usize>,
}

impl SchurFactorization {
    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    /// Starting row/column of every diagonal block, paired with its size.
    pub fn block_offsets(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|&size| {
                let b = (start, size);
                start += size;
                b
            })
            .collect()
    }

    /// Eigenvalues as `(re, im)` pairs in diagonal order.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        let t = &self.t;
        let mut out = Vec::with_capacity(self.dim());
        for (k, size) in self.block_offsets() {
            if size == 1 {
                out.push((t[(k, k)], 0.0));
            } else {
                let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
                let re = 0.5 * (a + d);
                let disc = 0.25 * (a - d) * (a - d) + b * c;
                let im = (-disc).max(0.0).sqrt();
                out.push((re, im));
                out.push((re, -im));
            }
        }
        out
    }
}

/// Default sweep budget for an `n × n` input.
pub fn default_max_sweeps(n: usize) -> usize {
    30 * n.max(1)
}

/// Computes the real Schur form of a square matrix.
///
/// `max_sweeps` bounds the total number of QR sweeps over all deflations.
pub fn real_schur(a: &DenseMatrix, max_sweeps: usize) -> Result<SchurFactorization, LinalgError> {
    let (mut q, mut h) = hessenberg(a)?;
    let n = h.rows();
    if n > 0 {
        francis_qr(&mut h, &mut q, max_sweeps)?;
        standardize_blocks(&mut h, &mut q);
    }
    // Everything below the first subdiagonal is zero by construction; make it exact.
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            h[(i, j)] = 0.0;
        }
    }
    let blocks = block_structure(&h);
    Ok(SchurFactorization { q, t: h, blocks })
}

fn block_structure(t: &DenseMatrix) -> Vec<usize> {
    let n = t.rows();
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)] != 0.0 {
            blocks.push(2);
            k += 2;
        } else {
            blocks.push(1);
            k += 1;
        }
    }
    blocks
}

fn negligible(h: &DenseMatrix, i: usize, window_norm: f64) -> bool {
    let mut scale = h[(i - 1, i - 1)].abs() + h[(i, i)].abs();
    if scale == 0.0 {
        scale = window_norm;
    }
    h[(i, i - 1)].abs() <= DEFLATION_TOL * scale
}

fn francis_qr(
    h: &mut DenseMatrix,
    q: &mut DenseMatrix,
    max_sweeps: usize,
) -> Result<(), LinalgError> {
    let n = h.rows();
    let hnorm = h.max_abs();
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut stalled = 0usize;

    loop {
        if hi == 0 {
            return Ok(());
        }
        // Locate the top of the unreduced window ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            if negligible(h, lo, hnorm) {
                h[(lo, lo - 1)] = 0.0;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stalled = 0;
            continue;
        }
        if lo + 1 == hi {
            if hi < 2 {
                return Ok(());
            }
            hi -= 2;
            stalled = 0;
            continue;
        }

        sweeps += 1;
        stalled += 1;
        if sweeps > max_sweeps {
            return Err(LinalgError::NoConvergence {
                iterations: sweeps - 1,
                index: hi,
            });
        }

        let (s, t) = if stalled.is_multiple_of(EXCEPTIONAL_PERIOD) {
            let w = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            let h11 = 0.75 * w + h[(hi, hi)];
            let h12 = -0.4375 * w;
            (2.0 * h11, h11 * h11 - h12 * w)
        } else {
            let m = hi - 1;
            (
                h[(m, m)] + h[(hi, hi)],
                h[(m, m)] * h[(hi, hi)] - h[(m, hi)] * h[(hi, m)],
            )
        };
        double_shift_sweep(h, q, lo, hi, s, t);
    }
}

/// Householder vector for a 3-vector (or 2-vector when `z` is `None`).
/// Returns `(v, beta)` with `(I − β v vᵀ) x = ∓‖x‖ e₁`; `beta = 0` means identity.
fn reflector(x: f64, y: f64, z: f64) -> ([f64; 3], f64, f64) {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 {
        return ([1.0, 0.0, 0.0], 0.0, 0.0);
    }
    let alpha = if x >= 0.0 { -norm } else { norm };
    let v = [x - alpha, y, z];
    let vv = v[0] * v[0] + y * y + z * z;
    if vv == 0.0 {
        return ([1.0, 0.0, 0.0], 0.0, alpha);
    }
    (v, 2.0 / vv, alpha)
}

fn apply_left(
    h: &mut DenseMatrix,
    rows: &[usize],
    v: &[f64],
    beta: f64,
    cols: std::ops::Range<usize>,
) {
    for j in cols {
        let s: f64 = rows
            .iter()
            .zip(v)
            .map(|(&r, &vi)| vi * h[(r, j)])
            .sum::<f64>()
            * beta;
        for (&r, &vi) in rows.iter().zip(v) {
            h[(r, j)] -= s * vi;
        }
    }
}

fn apply_right(
    m: &mut DenseMatrix,
    cols: &[usize],
    v: &[f64],
    beta: f64,
    rows: std::ops::Range<usize>,
) {
    for i in rows {
        let s: f64 = cols
            .iter()
            .zip(v)
            .map(|(&c, &vi)| vi * m[(i, c)])
            .sum::<f64>()
            * beta;
        for (&c, &vi) in cols.iter().zip(v) {
            m[(i, c)] -= s * vi;
        }
    }
}

fn double_shift_sweep(
    h: &mut DenseMatrix,
    q: &mut DenseMatrix,
    lo: usize,
    hi: usize,
    s: f64,
    t: f64,
) {
    let n = h.rows();
    let mut x = h[(lo, lo)] * h[(lo, lo)] + h[(lo, lo + 1)] * h[(lo + 1, lo)] - s * h[(lo, lo)] + t;
    let mut y = h[(lo + 1, lo)] * (h[(lo, lo)] + h[(lo + 1, lo + 1)] - s);
    let mut z = h[(lo + 1, lo)] * h[(lo + 2, lo + 1)];

    for k in lo..hi - 1 {
        let (v, beta, alpha) = reflector(x, y, z);
        if beta != 0.0 {
            let rows = [k, k + 1, k + 2];
            let first_col = if k > lo { k - 1 } else { lo };
            apply_left(h, &rows, &v, beta, first_col..n);
            let last_row = (k + 3).min(hi);
            apply_right(h, &rows, &v, beta, 0..last_row + 1);
            apply_right(q, &rows, &v, beta, 0..n);
            if k > lo {
                h[(k, k - 1)] = alpha;
                h[(k + 1, k - 1)] = 0.0;
                h[(k + 2, k - 1)] = 0.0;
            }
        }
        x = h[(k + 1, k)];
        y = h[(k + 2, k)];
        if k + 3 <= hi {
            z = h[(k + 3, k)];
        }
    }

    // Closing 2×2 reflector on rows/columns hi−1, hi.
    let k = hi - 1;
    let (v3, beta, alpha) = reflector(x, y, 0.0);
    if beta != 0.0 {
        let v = [v3[0], v3[1]];
        let rows = [k, k + 1];
        apply_left(h, &rows, &v, beta, (k - 1)..n);
        apply_right(h, &rows, &v, beta, 0..hi + 1);
        apply_right(q, &rows, &v, beta, 0..n);
        h[(k, k - 1)] = alpha;
        h[(k + 1, k - 1)] = 0.0;
    }
}

/// Splits 2×2 diagonal blocks with real eigenvalues into two 1×1 blocks
/// by a Givens rotation built from an eigenvector; complex pairs stay.
fn standardize_blocks(h: &mut DenseMatrix, q: &mut DenseMatrix) {
    let n = h.rows();
    let mut k = 0;
    while k + 1 < n {
        if h[(k + 1, k)] == 0.0 {
            k += 1;
            continue;
        }
        let (a, b, c, d) = (h[(k, k)], h[(k, k + 1)], h[(k + 1, k)], h[(k + 1, k + 1)]);
        let p = 0.5 * (a - d);
        let disc = p * p + b * c;
        if disc < 0.0 {
            k += 2;
            continue;
        }
        // Eigenvalue farther from d keeps the rotation well conditioned.
        let root = disc.sqrt();
        let lambda = 0.5 * (a + d) + if p >= 0.0 { root } else { -root };
        // Two candidate eigenvectors; take the longer one.
        let (e1, e2) = if (b * b + (lambda - a).powi(2)) >= ((lambda - d).powi(2) + c * c) {
            (b, lambda - a)
        } else {
            (lambda - d, c)
        };
        let r = e1.hypot(e2);
        if r == 0.0 {
            k += 2;
            continue;
        }
        let (cs, sn) = (e1 / r, e2 / r);
        // G = [[cs, −sn], [sn, cs]], H ← Gᵀ H G, Q ← Q G.
        for j in 0..n {
            let (u, w) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = cs * u + sn * w;
            h[(k + 1, j)] = -sn * u + cs * w;
        }
        for i in 0..n {
            let (u, w) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = cs * u + sn * w;
            h[(i, k + 1)] = -sn * u + cs * w;
        }
        for i in 0..n {
            let (u, w) = (q[(i, k)], q[(i, k + 1)]);
            q[(i, k)] = cs * u + sn * w;
            q[(i, k + 1)] = -sn * u + cs * w;
        }
        h[(k + 1, k)] = 0.0;
        k += 1;
    }
}
