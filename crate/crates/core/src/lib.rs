//! Minimal nonnegative solution of the quadratic matrix equation
//! `A·X² + B·X + C = 0` arising from discrete-time quasi-birth-death chains.
//!
//! The main entry points are [`solvers::newton_shamanskii_solve`] and
//! [`solvers::newton_solve`], which start from `X₀ = 0` and produce a
//! monotonically increasing sequence of iterates converging to the minimal
//! solution. Each Newton-like step solves `M·Z + N·Z·X = E` through a cached
//! [`sylvester::NewtonStepContext`]; Newton-Shamanskii reuses one context for
//! several updates.

pub mod bench;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod problems;
pub mod qbd;
pub mod solvers;
pub mod sylvester;

pub use error::{Error, LinalgError, Result, ValidationError};
pub use matrix::DenseMatrix;
pub use qbd::{validate_problem, QbdProblem, Recurrence};
pub use solvers::{Method, SolveReport, SolverOptions};
