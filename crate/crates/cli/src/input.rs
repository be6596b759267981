//! Plain-text numeric input.
//!
//! Matrices are written row by row, one row per line, entries separated by
//! whitespace. `#` starts a comment that runs to the end of the line; blank
//! lines are ignored. Entries are real (`-1.5`, `2e-3`) or complex
//! (`3+4j`, `-1-0.5j`, `2j`).
//!
//! Matrix arguments accept a file path or one of the shorthands
//!
//! - `diag:a,b,...` for a diagonal matrix,
//! - `rand:n[:seed]` for an `n × n` complex Gaussian matrix,
//! - `m:a,b;c,d` for an inline matrix with `;` between rows.
//!
//! Vector arguments accept a comma-separated list, `rand:n[:seed]`, or a
//! file whose entries are read in row-major order.

use nalgebra::{Complex, DMatrix, DVector};
use std::path::Path;
use thiserror::Error;
use tpmeasure::linalg::{random_complex_matrix, random_complex_vector, seeded_rng};
use tpmeasure::{CVector, OpMatrix, C64};

#[derive(Debug, Error, PartialEq)]
pub enum InputError {
    #[error("cannot parse number `{token}`")]
    Number { token: String },
    #[error("{source_name}: line {line}: {message}")]
    Line {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Shape(String),
}

/// Parses `re`, `re+imj`, `re-imj` or `imj`.
pub fn parse_complex(token: &str) -> Result<C64, InputError> {
    let err = || InputError::Number { token: token.to_string() };
    let t = token.trim();
    if t.is_empty() {
        return Err(err());
    }
    let real = |s: &str| -> Result<f64, InputError> {
        let x: f64 = s.parse().map_err(|_| err())?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(err())
        }
    };
    let Some(body) = t.strip_suffix('j') else {
        return Ok(Complex::new(real(t)?, 0.0));
    };
    // Split at the last sign that is not a leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, InputError> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(s),
        }
    };
    match split {
        Some(i) => Ok(Complex::new(real(&body[..i])?, imag(&body[i..])?)),
        None => Ok(Complex::new(0.0, imag(body)?)),
    }
}

fn parse_list(list: &str) -> Result<Vec<C64>, InputError> {
    list.split(',').map(parse_complex).collect()
}

/// Rows of a matrix in the text format; rows may differ in length.
pub fn parse_rows(text: &str, source_name: &str) -> Result<Vec<Vec<C64>>, InputError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| InputError::Line {
                source_name: source_name.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(rows)
}

/// A rectangular matrix in the text format.
pub fn parse_matrix(text: &str, source_name: &str) -> Result<OpMatrix, InputError> {
    let rows = parse_rows(text, source_name)?;
    rows_to_matrix(rows, source_name)
}

fn rows_to_matrix(rows: Vec<Vec<C64>>, source_name: &str) -> Result<OpMatrix, InputError> {
    let Some(first) = rows.first() else {
        return Err(InputError::Shape(format!("{source_name}: no matrix entries")));
    };
    let cols = first.len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(InputError::Shape(format!(
            "{source_name}: row {} has {} entries, expected {cols}",
            i + 1,
            row.len()
        )));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

fn read_file(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| InputError::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

/// `rand:n[:seed]`, with `default_seed` when no seed is given.
fn parse_rand(spec: &str, default_seed: u64) -> Result<Option<(usize, u64)>, InputError> {
    let Some(rest) = spec.strip_prefix("rand:") else {
        return Ok(None);
    };
    let mut parts = rest.split(':');
    let n = parts
        .next()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| InputError::Shape(format!("`{spec}`: expected rand:n[:seed] with n ≥ 1")))?;
    let seed = match parts.next() {
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| InputError::Shape(format!("`{spec}`: bad seed `{s}`")))?,
        None => default_seed,
    };
    if parts.next().is_some() {
        return Err(InputError::Shape(format!("`{spec}`: expected rand:n[:seed]")));
    }
    Ok(Some((n, seed)))
}

/// Resolves a matrix argument: shorthand or file path.
pub fn matrix_arg(spec: &str, default_seed: u64) -> Result<OpMatrix, InputError> {
    if let Some(list) = spec.strip_prefix("diag:") {
        let d = parse_list(list)?;
        return Ok(DMatrix::from_diagonal(&DVector::from_vec(d)));
    }
    if let Some((n, seed)) = parse_rand(spec, default_seed)? {
        return Ok(random_complex_matrix(&mut seeded_rng(seed), n, n));
    }
    if let Some(inline) = spec.strip_prefix("m:") {
        let rows = inline.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()?;
        return rows_to_matrix(rows, spec);
    }
    parse_matrix(&read_file(spec)?, spec)
}

/// Resolves a vector argument: list, shorthand or file path.
pub fn vector_arg(spec: &str, default_seed: u64) -> Result<CVector, InputError> {
    if let Some((n, seed)) = parse_rand(spec, default_seed)? {
        return Ok(random_complex_vector(&mut seeded_rng(seed), n));
    }
    if Path::new(spec).is_file() {
        let rows = parse_rows(&read_file(spec)?, spec)?;
        let entries: Vec<C64> = rows.into_iter().flatten().collect();
        if entries.is_empty() {
            return Err(InputError::Shape(format!("{spec}: no vector entries")));
        }
        return Ok(DVector::from_vec(entries));
    }
    Ok(DVector::from_vec(parse_list(spec)?))
}

/// Comma-separated reals.
pub fn real_list(spec: &str) -> Result<Vec<f64>, InputError> {
    spec.split(',')
        .map(|t| {
            let x: f64 = t.trim().parse().map_err(|_| InputError::Number { token: t.to_string() })?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(InputError::Number { token: t.to_string() })
            }
        })
        .collect()
}
