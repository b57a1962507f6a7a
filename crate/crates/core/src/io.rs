//! File formats.
//!
//! - Potentials: JSON object `{"q": [q1, ..., qd], "values": [...]}` with
//!   values in canonical (row-major) order.
//! - Laurent polynomials: JSON lines `{"exp": [...], "re": x, "im": y}`, one
//!   term per line in lexicographic exponent order.
//! - Band tables: CSV with header `k1..kd,lambda1..lambdaQ`.
//!
//! Floats are written with 17 significant digits (C `%.17g`), so reading
//! back is exact.

use std::io::{BufRead, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::floquet::SpectrumSample;
use crate::lattice::{Lattice, MultiIndex};
use crate::laurent::LaurentPoly;
use crate::potential::Potential;

#[derive(Debug, Clone, Deserialize)]
struct PotentialFile {
    q: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct TermLine {
    exp: MultiIndex,
    re: f64,
    im: f64,
}

/// Formats like C's `%.17g`.
pub fn g17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{x:.*}", (16 - exp) as usize);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn join_g17<'a>(xs: impl IntoIterator<Item = &'a f64>) -> String {
    xs.into_iter().map(|x| g17(*x)).collect::<Vec<_>>().join(",")
}

fn parse_error(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

pub fn potential_from_json(text: &str) -> Result<Potential> {
    let file: PotentialFile = serde_json::from_str(text).map_err(parse_error)?;
    Potential::new(Lattice::new(file.q)?, file.values)
}

pub fn potential_to_json(v: &Potential) -> String {
    let q: Vec<String> = v.lattice().periods().iter().map(|q| q.to_string()).collect();
    format!("{{\"q\":[{}],\"values\":[{}]}}", q.join(","), join_g17(v.values()))
}

pub fn write_poly(poly: &LaurentPoly, mut out: impl Write) -> std::io::Result<()> {
    for (exp, c) in poly.terms() {
        let exp: Vec<String> = exp.iter().map(|e| e.to_string()).collect();
        writeln!(out, "{{\"exp\":[{}],\"re\":{},\"im\":{}}}", exp.join(","), g17(c.re), g17(c.im))?;
    }
    Ok(())
}

/// Reads a polynomial dump; `bounds` gives the exponent box of the result.
pub fn read_poly(input: impl BufRead, bounds: Vec<i64>) -> Result<LaurentPoly> {
    let mut terms = Vec::new();
    for line in input.lines() {
        let line = line.map_err(parse_error)?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TermLine = serde_json::from_str(&line).map_err(parse_error)?;
        terms.push((t.exp, crate::Complex64::new(t.re, t.im)));
    }
    LaurentPoly::from_terms(bounds, terms)
}

pub fn write_bands(samples: &[SpectrumSample], mut out: impl Write) -> std::io::Result<()> {
    let Some(first) = samples.first() else {
        return Ok(());
    };
    let header: Vec<String> = (1..=first.k.len())
        .map(|j| format!("k{j}"))
        .chain((1..=first.eigenvalues.len()).map(|m| format!("lambda{m}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        writeln!(out, "{}", join_g17(s.k.iter().chain(&s.eigenvalues)))?;
    }
    Ok(())
}

/// Reads a k-path: one point per line, coordinates separated by commas or
/// whitespace. Blank lines and lines starting with `#` are skipped.
pub fn read_kpath(input: impl BufRead, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut path = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(parse_error)?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let k: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
            .collect::<Result<_>>()?;
        if k.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: k.len(),
            });
        }
        path.push(k);
    }
    Ok(path)
}
