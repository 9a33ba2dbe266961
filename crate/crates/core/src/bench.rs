//! Iteration-count benchmark over the delta-example grid.

use std::io::Write;
use std::time::Instant;

use crate::error::Result;
use crate::problems::{make_delta_example, DeltaExampleSpec};
use crate::solvers::{Method, SolverOptions};

pub const CSV_HEADER: [&str; 8] = [
    "delta",
    "n",
    "method",
    "m",
    "outer_iters",
    "inner_steps",
    "nres",
    "time_ms",
];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub deltas: Vec<f64>,
    pub methods: Vec<Method>,
    /// Inner steps for Newton-Shamanskii; Newton always uses 1.
    pub m: usize,
    pub tol: f64,
    pub max_outer: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![20, 100, 200],
            deltas: vec![0.5, 0.1, 1e-3],
            methods: vec![Method::Newton, Method::NewtonShamanskii],
            m: 2,
            tol: 1e-13,
            max_outer: 200,
        }
    }
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub delta: f64,
    pub n: usize,
    pub method: Method,
    pub m: usize,
    pub outcome: std::result::Result<CellResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub outer_iters: usize,
    pub inner_steps: usize,
    pub nres: f64,
    pub time_ms: f64,
}

impl BenchRow {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }

    fn record(&self) -> [String; 8] {
        let head = [
            self.delta.to_string(),
            self.n.to_string(),
            self.method.name().to_string(),
            self.m.to_string(),
        ];
        let tail = match &self.outcome {
            Ok(c) => [
                c.outer_iters.to_string(),
                c.inner_steps.to_string(),
                format!("{:.3e}", c.nres),
                format!("{:.3}", c.time_ms),
            ],
            Err(code) => [
                format!("error:{code}"),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        let [a, b, c, d] = head;
        let [e, f, g, h] = tail;
        [a, b, c, d, e, f, g, h]
    }
}

impl BenchConfig {
    fn options_for(&self, method: Method) -> (usize, SolverOptions) {
        let m = match method {
            Method::NewtonShamanskii => self.m,
            _ => 1,
        };
        let opts = SolverOptions {
            tol: self.tol,
            max_outer: self.max_outer,
            inner_steps: m,
            ..SolverOptions::default()
        };
        (m, opts)
    }

    /// Runs one cell; the timing covers the solve only, not problem construction.
    pub fn run_cell(&self, n: usize, delta: f64, method: Method) -> BenchRow {
        let (m, opts) = self.options_for(method);
        let outcome = DeltaExampleSpec::new(n, delta)
            .map(make_delta_example)
            .and_then(|p| {
                let start = Instant::now();
                let (_, report) = method.solve(&p, &opts)?;
                let time_ms = start.elapsed().as_secs_f64() * 1e3;
                Ok(CellResult {
                    outer_iters: report.outer_steps,
                    inner_steps: report.inner_steps,
                    nres: report.final_nres(),
                    time_ms,
                })
            })
            .map_err(|e| e.code().to_string());
        BenchRow {
            delta,
            n,
            method,
            m,
            outcome,
        }
    }

    /// Rows in grid order: sizes, then deltas, then methods.
    pub fn run(&self) -> Vec<BenchRow> {
        let mut rows = Vec::new();
        for &n in &self.sizes {
            for &delta in &self.deltas {
                for &method in &self.methods {
                    rows.push(self.run_cell(n, delta, method));
                }
            }
        }
        rows
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}
