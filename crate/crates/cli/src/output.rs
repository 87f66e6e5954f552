//! Deterministic CSV, JSON and `.dat` writers.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// One CSV cell.
pub enum Cell {
    Int(usize),
    Real(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

/// Twelve significant digits in scientific notation.
pub fn real(v: f64) -> String {
    format!("{v:.11e}")
}

fn cell(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Real(v) => real(*v),
    }
}

pub fn csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(cell).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Two whitespace-separated columns.
pub fn dat(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (x, y) in points {
        let _ = writeln!(out, "{} {}", real(x), real(y));
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(real(0.5), "5.00000000000e-1");
        assert_eq!(real(-10.5), "-1.05000000000e1");
        let t = csv(&["n", "x"], &[vec![3usize.into(), 0.25.into()]]);
        assert_eq!(t, "n,x\n3,2.50000000000e-1\n");
        assert_eq!(dat([(0.0, 1.0)]), "0.00000000000e0 1.00000000000e0\n");
    }
}
