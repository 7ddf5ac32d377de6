//! Deterministic text emission and parsing for fronts.
//!
//! Front files are plain CSV: a header naming the objective coordinates
//! `j1,j2[,j3...]`, then one point per row, rows sorted lexicographically,
//! every value printed as a plain decimal with twelve significant digits and
//! trailing zeros trimmed. Solver values are exact dyadic multiples of the
//! lattice step, so this rendering round-trips them exactly; byte-identical
//! output for identical inputs is what the determinism guarantees downstream
//! rest on.

use crate::{Error, Result};
use std::fs;
use std::path::Path;

/// Significant digits used for all emitted decimals.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Render a finite value as a plain decimal (never exponent notation) with
/// [`SIGNIFICANT_DIGITS`] significant digits, trailing zeros trimmed and
/// negative zero normalized to `0`.
pub fn format_significant(v: f64) -> String {
    debug_assert!(v.is_finite());
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Serialize a point set to front CSV: validates finiteness and uniform
/// dimension, sorts rows lexicographically, emits header plus rows.
pub fn front_to_csv(rows: &[Vec<f64>]) -> Result<String> {
    let Some(first) = rows.first() else {
        return Err(Error::EmptySet);
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::EmptySet);
    }
    let mut sorted: Vec<&Vec<f64>> = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        sorted.push(row);
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare totally"));

    let mut out = String::new();
    for k in 1..=dim {
        if k > 1 {
            out.push(',');
        }
        out.push('j');
        out.push_str(&k.to_string());
    }
    out.push('\n');
    for row in sorted {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format_significant(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse front CSV produced by [`front_to_csv`] (or hand-written in the same
/// shape). Returns the rows in file order; an empty body is allowed.
pub fn parse_front_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Csv("missing header line".to_string()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    for (k, name) in names.iter().enumerate() {
        let expect = format!("j{}", k + 1);
        if *name != expect {
            return Err(Error::Csv(format!(
                "header column {} is `{name}`, expected `{expect}`",
                k + 1
            )));
        }
    }
    let dim = names.len();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(dim);
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Csv(format!("line {}: bad number `{field}`", lineno + 2))
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            row.push(v);
        }
        if row.len() != dim {
            return Err(Error::Csv(format!(
                "line {}: {} fields, expected {dim}",
                lineno + 2,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Write front CSV to a file.
pub fn write_front_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let text = front_to_csv(rows)?;
    fs::write(path, text)?;
    Ok(())
}

/// Read front CSV from a file.
pub fn read_front_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    parse_front_csv(&text)
}
