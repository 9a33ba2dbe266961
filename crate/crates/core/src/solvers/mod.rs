//! Iteration drivers for the minimal nonnegative solution.
//!
//! Newton-Shamanskii freezes the derivative at `X_k` for `m` consecutive
//! updates
//!
//! ```text
//! X_{k,0} = X_k − Q'_{X_k}⁻¹ Q(X_k)
//! X_{k,s} = X_{k,s−1} − Q'_{X_k}⁻¹ Q(X_{k,s−1}),   s = 1, …, m − 1
//! X_{k+1} = X_{k,m−1}
//! ```
//!
//! so each outer step costs one [`NewtonStepContext`] build (real Schur form
//! plus per-block LU factors) and `m` cheap substitutions. `m = 1` is Newton's
//! method and runs through the same code.

mod certificate;

use std::time::{Duration, Instant};

pub use certificate::{
    mmatrix_certificate, mmatrix_certificate_capped, mmatrix_certificate_structured,
    zmatrix_certificate, Certificate,
};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::qbd::QbdProblem;
use crate::sylvester::{build_step_context, KRONECKER_CAP};

/// Slack allowed on the sign and ordering checks along the iterate chain.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Iteration budget multiplier for the linearly convergent fixed-point baseline.
pub const FIXED_POINT_BUDGET_FACTOR: usize = 50;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop once the normalized residual drops to this value.
    pub tol: f64,
    pub max_outer: usize,
    /// Updates per derivative evaluation; `1` is plain Newton.
    pub inner_steps: usize,
    /// Fail with [`Error::MonotonicityViolation`] if the chain stops increasing.
    pub check_monotone: bool,
    /// Certify the M-matrix condition at `X₀` (and at each outer iterate when `n ≤ certificate_cap`).
    pub check_mmatrix: bool,
    /// Largest `n` for which certificates are formed explicitly at every outer iterate.
    pub certificate_cap: usize,
    /// Keep every iterate in [`SolveReport::iterates`].
    pub record_iterates: bool,
    /// Starting iterate; `None` means the zero matrix.
    pub x0: Option<DenseMatrix>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_outer: 200,
            inner_steps: 2,
            check_monotone: true,
            check_mmatrix: true,
            certificate_cap: KRONECKER_CAP,
            record_iterates: false,
            x0: None,
        }
    }
}

impl SolverOptions {
    pub fn newton() -> Self {
        Self {
            inner_steps: 1,
            ..Self::default()
        }
    }

    pub fn with_inner_steps(mut self, m: usize) -> Self {
        self.inner_steps = m;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOptions(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.inner_steps == 0 {
            return Err(Error::InvalidOptions(
                "inner steps m must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Trace of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Derivative evaluations (step contexts built), or iterations for the fixed point.
    pub outer_steps: usize,
    /// Total updates of the iterate.
    pub inner_steps: usize,
    /// `(update index, NRes)`, starting with the initial iterate at index 0.
    pub residual_history: Vec<(usize, f64)>,
    pub monotone_ok: bool,
    pub mmatrix_ok: bool,
    pub converged: bool,
    /// Largest pivot ratio seen among cached step factorizations; a rough conditioning signal.
    pub max_pivot_ratio: f64,
    /// Every iterate including `X₀`, when requested.
    pub iterates: Vec<DenseMatrix>,
    pub elapsed: Duration,
}

impl SolveReport {
    fn new() -> Self {
        Self {
            outer_steps: 0,
            inner_steps: 0,
            residual_history: Vec::new(),
            monotone_ok: true,
            mmatrix_ok: true,
            converged: false,
            max_pivot_ratio: 1.0,
            iterates: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn final_nres(&self) -> f64 {
        self.residual_history.last().map_or(f64::NAN, |&(_, r)| r)
    }
}

/// Wall-clock time is excluded from equality.
impl PartialEq for SolveReport {
    fn eq(&self, other: &Self) -> bool {
        self.outer_steps == other.outer_steps
            && self.inner_steps == other.inner_steps
            && self.residual_history == other.residual_history
            && self.monotone_ok == other.monotone_ok
            && self.mmatrix_ok == other.mmatrix_ok
            && self.converged == other.converged
            && self.max_pivot_ratio == other.max_pivot_ratio
            && self.iterates == other.iterates
    }
}

/// Solution iterate paired with its report.
pub type Solution = (DenseMatrix, SolveReport);

/// Bookkeeping shared by all drivers.
struct Tracker<'a> {
    problem: &'a QbdProblem,
    opts: &'a SolverOptions,
    report: SolveReport,
}

impl<'a> Tracker<'a> {
    fn new(problem: &'a QbdProblem, opts: &'a SolverOptions) -> Self {
        Self {
            problem,
            opts,
            report: SolveReport::new(),
        }
    }

    /// Records a new iterate with its residual matrix; returns its NRes.
    fn record(
        &mut self,
        previous: Option<&DenseMatrix>,
        x: &DenseMatrix,
        q: &DenseMatrix,
    ) -> Result<f64> {
        let step = self.report.residual_history.len();
        let nres = self.problem.normalize_residual_norm(q.norm_inf(), x);
        self.report.residual_history.push((step, nres));
        if self.opts.record_iterates {
            self.report.iterates.push(x.clone());
        }
        if let Some(detail) = monotone_violation(previous, x, q) {
            self.report.monotone_ok = false;
            if self.opts.check_monotone {
                return Err(Error::MonotonicityViolation { step, detail });
            }
        }
        Ok(nres)
    }

    fn finish(mut self, start: Instant, converged: bool) -> SolveReport {
        self.report.converged = converged;
        self.report.elapsed = start.elapsed();
        self.report
    }
}

fn monotone_violation(
    previous: Option<&DenseMatrix>,
    x: &DenseMatrix,
    q: &DenseMatrix,
) -> Option<String> {
    let n = x.cols();
    if let Some(prev) = previous {
        if let Some(idx) = x
            .as_slice()
            .iter()
            .zip(prev.as_slice())
            .position(|(a, b)| *a < *b - MONOTONE_SLACK)
        {
            return Some(format!(
                "iterate decreased at ({}, {}): {} < {}",
                idx / n,
                idx % n,
                x.as_slice()[idx],
                prev.as_slice()[idx]
            ));
        }
    } else if let Some(idx) = x.as_slice().iter().position(|&v| v < -MONOTONE_SLACK) {
        return Some(format!(
            "initial iterate negative at ({}, {})",
            idx / n,
            idx % n
        ));
    }
    if let Some(idx) = q.as_slice().iter().position(|&v| v < -MONOTONE_SLACK) {
        return Some(format!(
            "residual negative at ({}, {}): {}",
            idx / n,
            idx % n,
            q.as_slice()[idx]
        ));
    }
    None
}

fn initial_iterate(p: &QbdProblem, opts: &SolverOptions) -> Result<DenseMatrix> {
    let n = p.dim();
    match &opts.x0 {
        Some(x0) if x0.shape() != (n, n) => Err(Error::InvalidOptions(format!(
            "initial iterate is {}x{}, problem has n = {n}",
            x0.rows(),
            x0.cols()
        ))),
        Some(x0) => Ok(x0.clone()),
        None => Ok(DenseMatrix::zeros(n, n)),
    }
}

/// M-matrix certificate at `x`: explicit Kronecker form for `n ≤ cap`, structured solve otherwise.
pub fn certificate_for(p: &QbdProblem, x: &DenseMatrix, cap: usize) -> Result<Certificate> {
    if p.dim() <= cap {
        mmatrix_certificate_capped(p, x, cap)
    } else {
        mmatrix_certificate_structured(p, x)
    }
}

fn certify(p: &QbdProblem, x: &DenseMatrix, cap: usize) -> Result<bool> {
    Ok(certificate_for(p, x, cap)?.is_certified())
}

/// Natural fixed-point iteration `X ← A·X² + (B + I)·X + C`, i.e. `X ← X + Q(X)`.
///
/// Linearly convergent; used as a baseline and to cross-check minimality.
pub fn fixed_point_solve(p: &QbdProblem, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    let start = Instant::now();
    let mut tracker = Tracker::new(p, opts);
    let mut x = initial_iterate(p, opts)?;
    let mut q = p.residual(&x)?;
    let mut nres = tracker.record(None, &x, &q)?;
    let budget = opts.max_outer * FIXED_POINT_BUDGET_FACTOR;

    while nres > opts.tol {
        if tracker.report.inner_steps >= budget {
            return Err(Error::MaxIterations {
                iterations: tracker.report.inner_steps,
                nres,
            });
        }
        let mut next = x.clone();
        next.axpy(1.0, &q)?;
        q = p.residual(&next)?;
        tracker.report.outer_steps += 1;
        tracker.report.inner_steps += 1;
        nres = tracker.record(Some(&x), &next, &q)?;
        x = next;
    }
    Ok((x, tracker.finish(start, true)))
}

/// Newton's method: one derivative evaluation per update.
pub fn newton_solve(p: &QbdProblem, opts: &SolverOptions) -> Result<Solution> {
    let opts = SolverOptions {
        inner_steps: 1,
        ..opts.clone()
    };
    newton_shamanskii_solve(p, &opts)
}

/// Newton-Shamanskii iteration with `opts.inner_steps` updates per derivative evaluation.
pub fn newton_shamanskii_solve(p: &QbdProblem, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    let start = Instant::now();
    let mut tracker = Tracker::new(p, opts);
    let mut x = initial_iterate(p, opts)?;
    let mut q = p.residual(&x)?;
    let mut nres = tracker.record(None, &x, &q)?;

    if opts.check_mmatrix {
        let ok = certify(p, &x, opts.certificate_cap)?;
        tracker.report.mmatrix_ok = ok;
        if !ok {
            return Err(Error::CertificateFailed);
        }
    }
    if nres <= opts.tol {
        return Ok((x, tracker.finish(start, true)));
    }

    for outer in 0..opts.max_outer {
        if outer > 0 && opts.check_mmatrix && p.dim() <= opts.certificate_cap {
            let ok = certify(p, &x, opts.certificate_cap)?;
            tracker.report.mmatrix_ok &= ok;
        }
        let ctx = build_step_context(p, &x)?;
        tracker.report.outer_steps += 1;
        tracker.report.max_pivot_ratio = tracker.report.max_pivot_ratio.max(ctx.pivot_ratio());

        for _ in 0..opts.inner_steps {
            let z = ctx.solve(&q.scale(-1.0))?;
            let mut next = x.clone();
            next.axpy(1.0, &z)?;
            q = p.residual(&next)?;
            tracker.report.inner_steps += 1;
            nres = tracker.record(Some(&x), &next, &q)?;
            x = next;
            if nres <= opts.tol {
                return Ok((x, tracker.finish(start, true)));
            }
        }
    }
    Err(Error::MaxIterations {
        iterations: tracker.report.outer_steps,
        nres,
    })
}

/// Solver selector used by the CLI and the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Newton,
    NewtonShamanskii,
    FixedPoint,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::NewtonShamanskii => "newton-shamanskii",
            Method::FixedPoint => "fixed-point",
        }
    }

    pub fn solve(&self, p: &QbdProblem, opts: &SolverOptions) -> Result<Solution> {
        match self {
            Method::Newton => newton_solve(p, opts),
            Method::NewtonShamanskii => newton_shamanskii_solve(p, opts),
            Method::FixedPoint => fixed_point_solve(p, opts),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "newton" => Ok(Method::Newton),
            "newton-shamanskii" | "ns" => Ok(Method::NewtonShamanskii),
            "fixed-point" => Ok(Method::FixedPoint),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
