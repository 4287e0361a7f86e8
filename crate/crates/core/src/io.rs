//! Complex matrix CSV: a header line `rows,cols`, then one `re,im` pair per
//! line in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<DMatrix<Complex64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("header must be `rows,cols`, got {header:?}")));
    };
    let mut values = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        let (re, im) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("entry {i}: expected `re,im`, got {line:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("entry {i}: bad number {t:?}")))
        };
        values.push(Complex64::new(parse(re)?, parse(im)?));
    }
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "header declares {rows}x{cols} = {} entries, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn format_matrix(m: &DMatrix<Complex64>) -> String {
    let mut out = format!("{},{}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            // `{:?}` on f64 prints the shortest round-trip representation
            let _ = writeln!(out, "{:?},{:?}", v.re, v.im);
        }
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<Complex64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<Complex64>) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

/// A vector is stored as an `n × 1` matrix.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(Error::Parse(format!("expected a vector, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.iter().copied().collect())
}

pub fn format_vector(v: &[Complex64]) -> String {
    format_matrix(&DMatrix::from_column_slice(v.len(), 1, v))
}
