use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of the dense kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is singular (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("real Schur iteration failed to converge after {iterations} sweeps (active block ends at {index})")]
    NoConvergence { iterations: usize, index: usize },
}

/// Coefficient block of a QBD problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    A,
    /// `B + I`, the block whose sign is constrained.
    BPlusI,
    C,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::A => f.write_str("A"),
            Block::BPlusI => f.write_str("B+I"),
            Block::C => f.write_str("C"),
        }
    }
}

/// Structural violations found by problem validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {block} at ({row}, {col})")]
    NonFinite {
        block: Block,
        row: usize,
        col: usize,
    },
    #[error("negative entry in {block} at ({row}, {col}): {value}")]
    NegativeEntry {
        block: Block,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("row {row} of A+B+I+C sums to 1{deviation:+e}")]
    RowSumViolation { row: usize, deviation: f64 },
    #[error("A+B+I+C is reducible: states {closed_set:?} form a closed class")]
    Reducible { closed_set: Vec<usize> },
}

/// Library-level error for problem operations, step solves, drivers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(
        "linear system for the stationary vector is singular (reducible or non-stochastic matrix)"
    )]
    SingularSystem,
    #[error("step matrix for Schur block {block} is singular: {source}")]
    SingularStepMatrix { block: usize, source: LinalgError },
    #[error("Kronecker oracle limited to n <= {cap}, got n = {n}")]
    OracleCapExceeded { n: usize, cap: usize },
    #[error("matrix is not a Z-matrix: positive off-diagonal entry {value} at ({row}, {col})")]
    NotZMatrix { row: usize, col: usize, value: f64 },
    #[error("initial iterate fails the M-matrix condition")]
    CertificateFailed,
    #[error("no convergence after {iterations} iterations (last NRes {nres:e})")]
    MaxIterations { iterations: usize, nres: f64 },
    #[error("monotonicity violated at inner step {step}: {detail}")]
    MonotonicityViolation { step: usize, detail: String },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("drift-rate target {target} unreachable (attainable range [{low}, {high}])")]
    TargetUnreachable { target: f64, low: f64, high: f64 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable category used in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Validation(_) | Error::ParameterOutOfRange(_) | Error::InvalidOptions(_) => {
                "validation"
            }
            Error::TargetUnreachable { .. } => "validation",
            Error::NotZMatrix { .. } | Error::OracleCapExceeded { .. } => "validation",
            Error::Linalg(LinalgError::NoConvergence { .. }) | Error::MaxIterations { .. } => {
                "no-convergence"
            }
            Error::MonotonicityViolation { .. } => "no-convergence",
            Error::Linalg(_)
            | Error::SingularSystem
            | Error::SingularStepMatrix { .. }
            | Error::CertificateFailed => "singular",
        }
    }

    /// Process exit code: parse=2, validation=3, singular=4, no-convergence=5, I/O=1.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "parse" => 2,
            "validation" => 3,
            "singular" => 4,
            "no-convergence" => 5,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
