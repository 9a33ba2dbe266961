#![allow(dead_code)]

use num_complex::Complex64;
use qbd::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(lo..hi))
}

pub fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().norm_inf() / b.norm_inf().max(f64::MIN_POSITIVE)
}

/// Characteristic polynomial coefficients `c[0..=n]` (monic, `c[n] = 1`)
/// by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DenseMatrix::zeros(n, n);
    for k in 1..=n {
        m = a.matmul(&m).unwrap().add_identity(c[n - k + 1]);
        let am = a.matmul(&m).unwrap();
        let tr: f64 = (0..n).map(|i| am[(i, i)]).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// Roots of a monic real polynomial by Durand–Kerner, then Newton polishing.
pub fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let radius = 1.0 + c[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32) * radius.min(2.0))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let (p, _) = horner(c, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = p / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = horner(c, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
    }
    z
}

/// Largest distance in a greedy nearest matching between two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn schur_eigenvalues(f: &qbd::linalg::SchurFactorization) -> Vec<Complex64> {
    f.eigenvalues()
        .into_iter()
        .map(|(re, im)| Complex64::new(re, im))
        .collect()
}

/// Largest relative mismatch of the power sums `Σ λᵢᵏ` against `tr(Aᵏ)`, `k = 1..=n`.
pub fn power_sum_mismatch(a: &DenseMatrix, eig: &[Complex64]) -> f64 {
    let n = a.rows();
    let rho = eig.iter().fold(0.0_f64, |m, z| m.max(z.norm())).max(1.0);
    let mut ak = DenseMatrix::identity(n);
    let mut worst = 0.0_f64;
    for k in 1..=n {
        ak = ak.matmul(a).unwrap();
        let tr: f64 = (0..n).map(|i| ak[(i, i)]).sum();
        let s: Complex64 = eig.iter().map(|z| z.powu(k as u32)).sum();
        let scale = (n as f64) * rho.powi(k as i32);
        worst = worst.max((s.re - tr).abs() / scale).max(s.im.abs() / scale);
    }
    worst
}

/// Power iteration for the stationary vector of a stochastic matrix.
pub fn stationary_by_power_iteration(p: &DenseMatrix) -> Vec<f64> {
    let n = p.rows();
    // Lazy chain (P + I)/2 is aperiodic with the same stationary vector.
    let lazy = p.add_identity(1.0).scale(0.5);
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let next = lazy.vecmat(&v).unwrap();
        let diff = next
            .iter()
            .zip(&v)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        v = next;
        if diff < 1e-17 {
            break;
        }
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn max_abs_vec_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Worst violation along a recorded iterate chain ending at `s`:
/// `(decrease between consecutive iterates, excess over s, negativity of Q)`.
pub fn chain_violations(
    p: &qbd::QbdProblem,
    iterates: &[DenseMatrix],
    s: &DenseMatrix,
) -> (f64, f64, f64) {
    let mut decrease = 0.0_f64;
    let mut excess = 0.0_f64;
    let mut negative = 0.0_f64;
    for (k, x) in iterates.iter().enumerate() {
        if k > 0 {
            decrease = decrease.max(
                iterates[k - 1]
                    .sub(x)
                    .unwrap()
                    .as_slice()
                    .iter()
                    .fold(0.0, |m: f64, v| m.max(*v)),
            );
        }
        excess = excess.max(
            x.sub(s)
                .unwrap()
                .as_slice()
                .iter()
                .fold(0.0, |m: f64, v| m.max(*v)),
        );
        negative = negative.max(-p.residual(x).unwrap().min_entry());
    }
    (decrease, excess, negative)
}

pub fn unit_row_sum_error(s: &DenseMatrix) -> f64 {
    s.row_sums()
        .iter()
        .fold(0.0_f64, |m, r| m.max((r - 1.0).abs()))
}
