//! Command-line front end: `solve`, `bench`, `check`, `generate`.
//!
//! Every failure prints one line `error:<code>: <message>` to stderr and
//! exits with parse=2, validation=3, singular=4, no-convergence=5 (1 for I/O
//! and failed benchmark cells).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{write_csv, BenchConfig};
use crate::error::Error;
use crate::problems::{
    make_delta_example, make_scalar_problem, random_problem, read_problem, write_matrix,
    write_problem, DeltaExampleSpec,
};
use crate::qbd::Recurrence;
use crate::solvers::{certificate_for, Method, SolverOptions};
use crate::sylvester::KRONECKER_CAP;

#[derive(Debug, Parser)]
#[command(
    name = "qbd",
    version,
    about = "Minimal nonnegative solutions of QBD quadratic matrix equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Newton,
    NewtonShamanskii,
    FixedPoint,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Newton => Method::Newton,
            MethodArg::NewtonShamanskii => Method::NewtonShamanskii,
            MethodArg::FixedPoint => Method::FixedPoint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    DeltaExample,
    Random,
    Scalar,
}

#[derive(Debug, clap::Args)]
struct IterationArgs {
    /// Stopping threshold on the normalized residual.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_outer: usize,
    /// Updates per derivative evaluation (Newton-Shamanskii).
    #[arg(long, default_value_t = 2)]
    m: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and print the iteration summary.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "newton-shamanskii")]
        method: MethodArg,
        #[command(flatten)]
        iter: IterationArgs,
        /// Write the solution matrix here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the delta-example grid and emit CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [20, 100, 200])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.1, 1e-3])]
        deltas: Vec<f64>,
        #[arg(long = "methods", alias = "method", value_enum, value_delimiter = ',', default_values = ["newton", "newton-shamanskii"])]
        methods: Vec<MethodArg>,
        #[command(flatten)]
        iter: IterationArgs,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Validate a problem file and classify its recurrence.
    Check { problem: PathBuf },
    /// Write a generated problem file.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target drift rate for random problems.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Compact decimal rendering: at most 12 decimals, trailing zeros dropped.
pub fn format_compact(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn missing(flag: &str, kind: &str) -> Error {
    Error::ParameterOutOfRange(format!("--{flag} is required for {kind}"))
}

/// Runs the CLI with explicit arguments and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let first = e.to_string();
                    let first = first
                        .lines()
                        .next()
                        .unwrap_or("")
                        .trim_start_matches("error: ");
                    let _ = writeln!(err, "error:usage: {first}");
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error:{}: {e}", e.code());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Solve {
            problem,
            method,
            iter,
            out: out_path,
        } => {
            let p = read_problem(&problem)?;
            let method = Method::from(method);
            let opts = SolverOptions {
                tol: iter.tol,
                max_outer: iter.max_outer,
                inner_steps: iter.m,
                ..SolverOptions::default()
            };
            let (s, report) = method.solve(&p, &opts)?;
            let m = if method == Method::NewtonShamanskii {
                iter.m
            } else {
                1
            };
            let _ = writeln!(
                out,
                "method={method} m={m} outer={} inner={} nres={:.3e} converged={} monotone={} mmatrix={} time_ms={:.3}",
                report.outer_steps,
                report.inner_steps,
                report.final_nres(),
                report.converged,
                report.monotone_ok,
                report.mmatrix_ok,
                report.elapsed.as_secs_f64() * 1e3
            );
            if let Some(path) = out_path {
                write_matrix(&s, path)?;
            }
            Ok(0)
        }
        Command::Bench {
            sizes,
            deltas,
            methods,
            iter,
            csv,
        } => {
            let cfg = BenchConfig {
                sizes,
                deltas,
                methods: methods.into_iter().map(Method::from).collect(),
                m: iter.m,
                tol: iter.tol,
                max_outer: iter.max_outer,
            };
            let rows = cfg.run();
            let written = match &csv {
                Some(path) => std::fs::File::create(path)
                    .map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })
                    .and_then(|f| csv_io(write_csv(&rows, f), path)),
                None => csv_io(write_csv(&rows, &mut *out), &PathBuf::from("<stdout>")),
            };
            written?;
            Ok(if rows.iter().any(|r| r.failed()) {
                1
            } else {
                0
            })
        }
        Command::Check { problem } => {
            let p = read_problem(&problem)?;
            let rho = p.drift_rate()?;
            let class = Recurrence::classify(rho, 1e-12);
            let zero = crate::DenseMatrix::zeros(p.dim(), p.dim());
            let cert = if certificate_for(&p, &zero, KRONECKER_CAP)?.is_certified() {
                "certificate OK"
            } else {
                "certificate FAILED"
            };
            let _ = writeln!(out, "valid n={}", p.dim());
            let _ = writeln!(out, "rho={}, {class}, {cert}", format_compact(rho));
            Ok(0)
        }
        Command::Generate {
            kind,
            n,
            delta,
            seed,
            rho,
            a,
            c,
            out: path,
        } => {
            let p = match kind {
                Kind::DeltaExample => {
                    let n = n.ok_or_else(|| missing("n", "delta-example"))?;
                    let delta = delta.ok_or_else(|| missing("delta", "delta-example"))?;
                    make_delta_example(DeltaExampleSpec::new(n, delta)?)
                }
                Kind::Random => {
                    let n = n.ok_or_else(|| missing("n", "random"))?;
                    random_problem(n, seed, rho)?
                }
                Kind::Scalar => {
                    let a = a.ok_or_else(|| missing("a", "scalar"))?;
                    let c = c.ok_or_else(|| missing("c", "scalar"))?;
                    make_scalar_problem(a, c)?
                }
            };
            write_problem(&p, &path)?;
            let _ = writeln!(out, "rho={}", format_compact(p.drift_rate()?));
            Ok(0)
        }
    }
}

fn csv_io(r: Result<(), csv::Error>, path: &std::path::Path) -> Result<(), Error> {
    r.map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })
}
