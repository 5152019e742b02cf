//! CSV input and output. Floats are written with 17 significant digits so
//! that every value reads back bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LowerTriangular, SampleMatrix, SymMatrix};
use crate::scalar::Scalar;

pub fn format_float<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

fn data_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Data {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Raw rows of a numeric CSV with their 1-based line numbers; all rows must
/// have the same length.
fn read_rows(path: &Path, header: bool) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_error(path, 0, e.to_string()))?;
    let mut rows = Vec::new();
    let mut width = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            data_error(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(data_error(path, line, format!("expected {w} fields, found {}", rec.len())));
            }
            _ => {}
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if rows.is_empty() {
        return Err(data_error(path, 0, "no data rows"));
    }
    Ok(rows)
}

fn parse_float<T: Scalar>(path: &Path, line: usize, field: &str) -> Result<T> {
    let v: f64 = field
        .parse()
        .map_err(|_| data_error(path, line, format!("cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(data_error(path, line, format!("non-finite value {field:?}")));
    }
    Ok(T::lit(v))
}

/// Reads an `n × p` numeric matrix.
pub fn read_matrix<T: Scalar>(path: &Path, header: bool) -> Result<SampleMatrix<T>> {
    let rows = read_rows(path, header)?;
    let p = rows[0].1.len();
    let mut data = Vec::with_capacity(rows.len() * p);
    for (line, row) in &rows {
        for field in row {
            data.push(parse_float(path, *line, field)?);
        }
    }
    SampleMatrix::new(rows.len(), p, data)
}

/// Reads a matrix whose last column is an integer class label.
pub fn read_labeled<T: Scalar>(path: &Path, header: bool) -> Result<(SampleMatrix<T>, Vec<i64>)> {
    let rows = read_rows(path, header)?;
    let width = rows[0].1.len();
    if width < 2 {
        return Err(data_error(path, rows[0].0, "labeled data need at least one feature and a label"));
    }
    let p = width - 1;
    let mut data = Vec::with_capacity(rows.len() * p);
    let mut labels = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        for field in &row[..p] {
            data.push(parse_float(path, *line, field)?);
        }
        let label = row[p]
            .parse::<i64>()
            .map_err(|_| data_error(path, *line, format!("label {:?} is not an integer", row[p])))?;
        labels.push(label);
    }
    Ok((SampleMatrix::new(rows.len(), p, data)?, labels))
}

/// Reads a square matrix and keeps its lower triangle.
pub fn read_lower<T: Scalar>(path: &Path) -> Result<LowerTriangular<T>> {
    let m = read_matrix::<T>(path, false)?;
    let dense = DenseMatrix::from_row_major(m.n(), m.p(), m.data().to_vec())?;
    LowerTriangular::from_dense(&dense)
}

pub fn read_sym<T: Scalar>(path: &Path) -> Result<SymMatrix<T>> {
    let m = read_matrix::<T>(path, false)?;
    SymMatrix::from_dense(&DenseMatrix::from_row_major(m.n(), m.p(), m.data().to_vec())?)
}

/// Writes rows of already formatted fields, with an optional header line.
pub fn write_table(path: &Path, header: Option<&[&str]>, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dense<T: Scalar>(path: &Path, m: &DenseMatrix<T>) -> Result<()> {
    write_table(path, None, (0..m.rows()).map(|i| m.row(i).iter().map(|&v| format_float(v)).collect()))
}

/// Full `p × p` form with zeros above the diagonal.
pub fn write_lower<T: Scalar>(path: &Path, l: &LowerTriangular<T>) -> Result<()> {
    write_dense(path, &l.to_dense())
}

pub fn write_sym<T: Scalar>(path: &Path, s: &SymMatrix<T>) -> Result<()> {
    write_dense(path, &s.to_dense())
}

pub fn write_samples<T: Scalar>(path: &Path, x: &SampleMatrix<T>) -> Result<()> {
    write_table(path, None, x.rows().map(|r| r.iter().map(|&v| format_float(v)).collect()))
}

pub fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
