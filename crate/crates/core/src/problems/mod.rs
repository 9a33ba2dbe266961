//! Benchmark generators, closed-form scalar cases, and problem files.

mod io;

pub use io::{
    format_matrix, format_problem, parse_matrix, parse_problem, read_matrix, read_problem,
    write_matrix, write_problem,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::qbd::QbdProblem;

/// Parameters of the symmetric test family `A = W`, `B = W − I`, `C = W + δI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaExampleSpec {
    pub n: usize,
    pub delta: f64,
}

impl DeltaExampleSpec {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "n must be at least 2, got {n}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { n, delta })
    }

    /// Off-diagonal entry of `W`.
    ///
    /// `A + B + I + C = 3W + δI` must be stochastic, so `3(n − 1)w + δ = 1`.
    pub fn off_diagonal(&self) -> f64 {
        (1.0 - self.delta) / (3.0 * (self.n - 1) as f64)
    }
}

/// Builds `A = W`, `B = W − I`, `C = W + δI` with `W` zero on the diagonal
/// and constant `(1 − δ) / (3(n − 1))` elsewhere. Its drift rate is `1 − δ`.
pub fn make_delta_example(spec: DeltaExampleSpec) -> QbdProblem {
    let n = spec.n;
    let w = spec.off_diagonal();
    let wm = DenseMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w });
    let b = wm.add_identity(-1.0);
    let c = wm.add_identity(spec.delta);
    QbdProblem::new(wm, b, c).expect("delta example satisfies the problem invariants")
}

/// The `n = 1` problem `a·x² − (a + c)·x + c = 0`.
pub fn make_scalar_problem(a: f64, c: f64) -> Result<QbdProblem> {
    if !(a >= 0.0 && c >= 0.0 && a + c <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "scalar problem needs a >= 0, c >= 0, a + c <= 1 (got a = {a}, c = {c})"
        )));
    }
    let m = |v: f64| DenseMatrix::from_vec(1, 1, vec![v]).expect("1x1");
    Ok(QbdProblem::new(m(a), m(-a - c), m(c))?)
}

/// Minimal nonnegative root of the scalar problem: the roots are `1` and `c/a`.
pub fn scalar_minimal_root(a: f64, c: f64) -> f64 {
    if a > 0.0 {
        (c / a).min(1.0)
    } else if c > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Accuracy of the drift-rate match for [`random_problem`].
pub const RHO_TARGET_TOL: f64 = 1e-6;

/// Random dense QBD problem, deterministic per `(n, seed, rho_target)`.
///
/// Entries of `A`, `B + I`, `C` are drawn strictly positive and rows of the
/// sum are normalized. With a target drift rate, the per-row mass of `A + C`
/// is split as `θ·Â + (1 − θ)·Ĉ` where `Â`, `Ĉ` both carry that full mass, and
/// `θ` is found by bisection: `ρ(θ) − 1 = (2θ − 1)·pᵀr` runs from negative at
/// `θ = 0` to positive at `θ = 1`.
pub fn random_problem(n: usize, seed: u64, rho_target: Option<f64>) -> Result<QbdProblem> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(0.05..1.0));
    let (mut a, mut d, mut c) = (draw(), draw(), draw());
    for i in 0..n {
        let total: f64 = [&a, &d, &c]
            .iter()
            .map(|m| m.row(i).iter().sum::<f64>())
            .sum();
        for m in [&mut a, &mut d, &mut c] {
            m.row_mut(i).iter_mut().for_each(|v| *v /= total);
        }
    }
    let assemble = |a: DenseMatrix, c: DenseMatrix| -> Result<QbdProblem> {
        Ok(QbdProblem::new(a, d.add_identity(-1.0), c)?)
    };
    let Some(target) = rho_target else {
        return assemble(a, c);
    };

    // Â and Ĉ each get the full A+C row mass r_i.
    let mass: Vec<f64> = (0..n)
        .map(|i| a.row(i).iter().sum::<f64>() + c.row(i).iter().sum::<f64>())
        .collect();
    let rescale = |m: &DenseMatrix| {
        let mut out = m.clone();
        for (i, &r) in mass.iter().enumerate() {
            let s: f64 = m.row(i).iter().sum();
            out.row_mut(i).iter_mut().for_each(|v| *v *= r / s);
        }
        out
    };
    let (a_hat, c_hat) = (rescale(&a), rescale(&c));
    let mix = |theta: f64| -> Result<QbdProblem> {
        let mut am = a_hat.scale(theta);
        let mut cm = c_hat.scale(1.0 - theta);
        // Keep each row of A + C exactly on its mass.
        for (i, &r) in mass.iter().enumerate() {
            let s: f64 = am.row(i).iter().sum::<f64>() + cm.row(i).iter().sum::<f64>();
            let f = r / s;
            am.row_mut(i).iter_mut().for_each(|v| *v *= f);
            cm.row_mut(i).iter_mut().for_each(|v| *v *= f);
        }
        assemble(am, cm)
    };

    let rho_at = |theta: f64| -> Result<f64> { mix(theta)?.drift_rate() };
    let (low, high) = (rho_at(0.0)?, rho_at(1.0)?);
    if !(target >= low && target <= high) {
        return Err(Error::TargetUnreachable { target, low, high });
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = mix(mid)?;
        let rho = p.drift_rate()?;
        if (rho - target).abs() <= RHO_TARGET_TOL {
            return Ok(p);
        }
        if rho < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::TargetUnreachable { target, low, high })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_example_two_by_two() {
        let p = make_delta_example(DeltaExampleSpec::new(2, 0.5).unwrap());
        let w = 1.0 / 6.0;
        assert!((p.a()[(0, 1)] - w).abs() < 1e-16);
        assert_eq!(p.a()[(0, 0)], 0.0);
        assert_eq!(p.b()[(1, 1)], -1.0);
        assert_eq!(p.c()[(0, 0)], 0.5);
    }

    #[test]
    fn delta_example_rows_are_stochastic() {
        let spec = DeltaExampleSpec::new(20, 0.5).unwrap();
        assert!((spec.off_diagonal() - 0.5 / 57.0).abs() < 1e-18);
        let p = make_delta_example(spec);
        for s in p.phase_matrix().row_sums() {
            assert!((s - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn delta_spec_rejects_bad_parameters() {
        assert!(DeltaExampleSpec::new(1, 0.5).is_err());
        assert!(DeltaExampleSpec::new(5, 0.0).is_err());
        assert!(DeltaExampleSpec::new(5, 1.0).is_err());
    }

    #[test]
    fn scalar_problem_range() {
        assert!(make_scalar_problem(0.6, 0.5).is_err());
        assert!(make_scalar_problem(-0.1, 0.5).is_err());
        let p = make_scalar_problem(0.2, 0.5).unwrap();
        assert!((p.drift_rate().unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(scalar_minimal_root(0.2, 0.5), 1.0);
        assert_eq!(scalar_minimal_root(0.5, 0.2), 0.4);
        assert_eq!(scalar_minimal_root(0.0, 1.0), 1.0);
    }

    #[test]
    fn random_problem_hits_target() {
        let p = random_problem(8, 42, Some(0.5)).unwrap();
        assert!((p.drift_rate().unwrap() - 0.5).abs() <= RHO_TARGET_TOL);
    }

    #[test]
    fn random_problem_is_deterministic() {
        assert_eq!(
            random_problem(8, 42, Some(0.5)).unwrap(),
            random_problem(8, 42, Some(0.5)).unwrap()
        );
        assert_eq!(random_problem(1, 3, None).unwrap().dim(), 1);
    }

    #[test]
    fn unreachable_target() {
        assert!(matches!(
            random_problem(4, 1, Some(5.0)),
            Err(Error::TargetUnreachable { .. })
        ));
    }
}
