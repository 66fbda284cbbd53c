//! The alist text format for sparse parity-check matrices.
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! <N column degrees>
//! <M row degrees>
//! <N lines: 1-based check indices of each variable, zero padded>
//! <M lines: 1-based variable indices of each check, zero padded>
//! ```

use std::fmt::Write;

use super::ParityCheckMatrix;
use crate::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, integers).
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, text) in self.inner.by_ref() {
            self.last = i + 1;
            if text.trim().is_empty() {
                continue;
            }
            let values = text
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| parse_err(i + 1, format!("invalid integer {tok:?} in {what}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, values));
        }
        Err(parse_err(
            self.last + 1,
            format!("unexpected end of input, expected {what}"),
        ))
    }
}

fn expect_len(line: usize, values: &[usize], len: usize, what: &str) -> Result<()> {
    if values.len() != len {
        return Err(parse_err(
            line,
            format!("expected {len} {what}, found {}", values.len()),
        ));
    }
    Ok(())
}

/// Reads one index list, dropping zero padding and checking range and duplicates.
fn index_list(
    line: usize,
    values: &[usize],
    degree: usize,
    max_degree: usize,
    bound: usize,
    what: &str,
) -> Result<Vec<usize>> {
    if values.len() > max_degree.max(degree) {
        return Err(parse_err(
            line,
            format!(
                "{what} has {} entries, max degree is {max_degree}",
                values.len()
            ),
        ));
    }
    let mut out: Vec<usize> = Vec::with_capacity(degree);
    for &v in values.iter().filter(|&&v| v != 0) {
        if v > bound {
            return Err(parse_err(
                line,
                format!("{what} index {v} out of range 1..={bound}"),
            ));
        }
        if out.contains(&(v - 1)) {
            return Err(parse_err(line, format!("duplicate index {v} in {what}")));
        }
        out.push(v - 1);
    }
    if out.len() != degree {
        return Err(parse_err(
            line,
            format!(
                "{what} lists {} indices, declared degree {degree}",
                out.len()
            ),
        ));
    }
    Ok(out)
}

/// Parses an alist document.
pub fn load_alist(bytes: &[u8]) -> Result<ParityCheckMatrix> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(1, format!("not UTF-8: {e}")))?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };

    let (l, dims) = lines.next_ints("header")?;
    expect_len(l, &dims, 2, "header values (N M)")?;
    let (n_vars, n_checks) = (dims[0], dims[1]);
    if n_vars == 0 || n_checks == 0 {
        return Err(parse_err(l, "N and M must be positive"));
    }
    let (l, maxes) = lines.next_ints("max degrees")?;
    expect_len(l, &maxes, 2, "max degrees")?;
    let (max_col, max_row) = (maxes[0], maxes[1]);

    let (l, col_deg) = lines.next_ints("column degrees")?;
    expect_len(l, &col_deg, n_vars, "column degrees")?;
    if let Some(d) = col_deg.iter().find(|&&d| d > max_col || d == 0) {
        return Err(parse_err(
            l,
            format!("column degree {d} outside 1..={max_col}"),
        ));
    }
    let (l, row_deg) = lines.next_ints("row degrees")?;
    expect_len(l, &row_deg, n_checks, "row degrees")?;
    if let Some(d) = row_deg.iter().find(|&&d| d > max_row || d == 0) {
        return Err(parse_err(
            l,
            format!("row degree {d} outside 1..={max_row}"),
        ));
    }

    let mut cols = Vec::with_capacity(n_vars);
    for (n, &d) in col_deg.iter().enumerate() {
        let (l, values) = lines.next_ints("column list")?;
        cols.push(index_list(
            l,
            &values,
            d,
            max_col,
            n_checks,
            &format!("column {}", n + 1),
        )?);
    }
    let mut rows = Vec::with_capacity(n_checks);
    let mut row_lines = Vec::with_capacity(n_checks);
    for (m, &d) in row_deg.iter().enumerate() {
        let (l, values) = lines.next_ints("row list")?;
        rows.push(index_list(
            l,
            &values,
            d,
            max_row,
            n_vars,
            &format!("row {}", m + 1),
        )?);
        row_lines.push(l);
    }

    let matrix = ParityCheckMatrix::from_cols(n_checks, cols)
        .map_err(|e| parse_err(lines.last, e.to_string()))?;
    for (m, mut row) in rows.into_iter().enumerate() {
        row.sort_unstable();
        if row != matrix.row(m) {
            return Err(parse_err(
                row_lines[m],
                format!("row {} disagrees with the column lists", m + 1),
            ));
        }
    }
    Ok(matrix)
}

/// Serializes a matrix as alist text.
pub fn save_alist(matrix: &ParityCheckMatrix) -> Vec<u8> {
    let col_deg = matrix.col_degrees();
    let row_deg = matrix.row_degrees();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    let join =
        |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", matrix.n_vars(), matrix.n_checks());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut col_deg.iter().copied()));
    let _ = writeln!(out, "{}", join(&mut row_deg.iter().copied()));
    for col in matrix.cols() {
        let padded = col
            .iter()
            .map(|&m| m + 1)
            .chain(std::iter::repeat_n(0, max_col - col.len()));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    for row in matrix.rows() {
        let padded = row
            .iter()
            .map(|&n| n + 1)
            .chain(std::iter::repeat_n(0, max_row - row.len()));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out.into_bytes()
}
