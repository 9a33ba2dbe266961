//! Self-contained dense kernels: LU, Hessenberg reduction and real Schur form.

mod hessenberg;
mod lu;
mod schur;

pub use hessenberg::hessenberg;
pub use lu::{lu_factor, lu_solve, LuFactorization, SINGULAR_RTOL};
pub use schur::{default_max_sweeps, real_schur, SchurFactorization, DEFLATION_TOL};
