//! Plain-text problem and matrix files.
//!
//! ```text
//! n
//! <n rows of A, n numbers each>
//! <n rows of B>
//! <n rows of C>
//! ```
//!
//! Lines starting with `#` and blank lines are skipped. Values are written
//! with 17 significant digits, which round-trips every `f64` exactly. A
//! single-matrix file (used for solutions) has the same layout with one block.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::qbd::{validate_problem, QbdProblem, DEFAULT_ROW_SUM_TOL};

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Content lines as `(1-based line number, text)`.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn parse_blocks(text: &str, blocks: usize) -> Result<Vec<DenseMatrix>> {
    let mut lines = content_lines(text);
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_error(1, 1, "missing dimension line"))?;
    let n: usize = first.trim().parse().map_err(|_| {
        parse_error(
            first_no,
            1,
            format!("expected dimension, found `{}`", first.trim()),
        )
    })?;
    if n == 0 {
        return Err(parse_error(first_no, 1, "dimension must be positive"));
    }

    let mut out = Vec::with_capacity(blocks);
    let mut last_line = first_no;
    for b in 0..blocks {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            let (no, line) = lines.next().ok_or_else(|| {
                parse_error(
                    last_line + 1,
                    1,
                    format!("expected {} matrix rows, found {}", blocks * n, b * n + r),
                )
            })?;
            last_line = no;
            let mut count = 0;
            for (col, token) in tokens(line) {
                let v: f64 = token
                    .parse()
                    .map_err(|_| parse_error(no, col, format!("invalid number `{token}`")))?;
                if !v.is_finite() {
                    return Err(parse_error(no, col, format!("non-finite value `{token}`")));
                }
                count += 1;
                if count > n {
                    return Err(parse_error(
                        no,
                        col,
                        format!("expected {n} values, found more"),
                    ));
                }
                data.push(v);
            }
            if count < n {
                return Err(parse_error(
                    no,
                    line.len() + 1,
                    format!("expected {n} values, found {count}"),
                ));
            }
        }
        out.push(DenseMatrix::from_vec(n, n, data).expect("n*n values"));
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_error(
            no,
            1,
            format!("unexpected data after {} matrix rows", blocks * n),
        ));
    }
    Ok(out)
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (offset + 1, tok)
    })
}

/// Parses and validates a problem file body.
pub fn parse_problem(text: &str) -> Result<QbdProblem> {
    let mut blocks = parse_blocks(text, 3)?.into_iter();
    let (a, b, c) = (
        blocks.next().unwrap(),
        blocks.next().unwrap(),
        blocks.next().unwrap(),
    );
    Ok(validate_problem(a, b, c, DEFAULT_ROW_SUM_TOL)?)
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    Ok(parse_blocks(text, 1)?.remove(0))
}

fn push_rows(out: &mut String, m: &DenseMatrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn format_problem(p: &QbdProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", p.dim());
    for m in [p.a(), p.b(), p.c()] {
        push_rows(&mut out, m);
    }
    out
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.rows());
    push_rows(&mut out, m);
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<QbdProblem> {
    parse_problem(&read(path.as_ref())?)
}

pub fn write_problem(p: &QbdProblem, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &format_problem(p))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&read(path.as_ref())?)
}

pub fn write_matrix(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    if !m.is_square() {
        return Err(crate::error::LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        }
        .into());
    }
    write(path.as_ref(), &format_matrix(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ValidationError;
    use crate::problems::{make_delta_example, DeltaExampleSpec};

    #[test]
    fn delta_example_round_trip() {
        let p = make_delta_example(DeltaExampleSpec::new(5, 0.1).unwrap());
        let back = parse_problem(&format_problem(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let text = "# scalar\n1\n\n# A\n0.2\n-0.7\n# C\n0.5\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.c()[(0, 0)], 0.5);
    }

    #[test]
    fn missing_rows_are_a_parse_error() {
        let text = "2\n0 0.1\n0.1 0\n-1 0.1\n0.1 -1\n0.5 0.2\n";
        match parse_problem(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_token_reports_column() {
        let text = "1\n0.2\n-0.7 \n0.5x\n";
        match parse_problem(text) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (4, 1)),
            other => panic!("unexpected {other:?}"),
        }
        let text = "1\n0.2  9\n-0.7\n0.5\n";
        match parse_problem(text) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 6)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reducible_file_fails_validation() {
        let text = "2\n0.25 0\n0 0.25\n-0.5 0\n0 -0.5\n0.25 0\n0 0.25\n";
        assert!(matches!(
            parse_problem(text),
            Err(Error::Validation(ValidationError::Reducible { .. }))
        ));
    }

    #[test]
    fn seventeen_digit_output() {
        let m = DenseMatrix::from_rows(&[[0.1]]).unwrap();
        assert_eq!(format_matrix(&m), "1\n1.0000000000000001e-1\n");
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }
}
