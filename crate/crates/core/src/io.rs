//! CSV readers for point clouds and affinity matrices.
//!
//! Numbers always use `.` as the decimal separator. A points file may start
//! with one header row, detected by any field that does not parse as a
//! number; a header column named `label` holds ground-truth labels and is
//! not treated as a coordinate.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;

use crate::affinity::{validate_affinity, AffinityMatrix, PointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointsTable {
    pub cloud: PointCloud,
    pub labels: Option<Vec<i64>>,
}

fn records<R: Read>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

fn parse_row(row: &[String], line: usize) -> Result<Vec<f64>> {
    row.iter()
        .enumerate()
        .map(|(col, s)| {
            s.parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("row {line}, column {col}: {s:?} is not a number"))
            })
        })
        .collect()
}

pub fn read_points<R: Read>(reader: R) -> Result<PointsTable> {
    let mut rows = records(reader)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput("points file is empty".into()));
    }
    let header = if rows[0].iter().any(|s| s.parse::<f64>().is_err()) {
        Some(rows.remove(0))
    } else {
        None
    };
    let label_col = header
        .as_ref()
        .and_then(|h| h.iter().position(|s| s.eq_ignore_ascii_case("label")));

    let mut coords = Vec::with_capacity(rows.len());
    let mut labels = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let line = i + 1 + usize::from(header.is_some());
        let mut values = parse_row(row, line)?;
        if let Some(c) = label_col {
            if c >= values.len() {
                return Err(Error::InvalidInput(format!(
                    "row {line} has no label column"
                )));
            }
            let l = values.remove(c);
            if l.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "row {line}: label {l} is not an integer"
                )));
            }
            labels.push(l as i64);
        }
        coords.push(values);
    }
    if coords.is_empty() {
        return Err(Error::InvalidInput("points file has no data rows".into()));
    }
    Ok(PointsTable {
        cloud: PointCloud::from_rows(&coords)?,
        labels: label_col.map(|_| labels),
    })
}

pub fn read_points_file(path: impl AsRef<Path>) -> Result<PointsTable> {
    read_points(File::open(path)?)
}

/// Reads a square affinity matrix. Self-loops are rejected unless
/// `repair_diagonal` is set, in which case the diagonal is zeroed.
pub fn read_affinity<R: Read>(reader: R, repair_diagonal: bool) -> Result<AffinityMatrix> {
    let rows = records(reader)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidInput("affinity file is empty".into()));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidInput(format!(
                "affinity matrix must be square: row {} has {} columns, expected {n}",
                i + 1,
                row.len()
            )));
        }
        flat.extend(parse_row(row, i + 1)?);
    }
    let mut values = Array2::from_shape_vec((n, n), flat).expect("n x n entries");
    if repair_diagonal {
        values.diag_mut().fill(0.0);
    }
    let diag = validate_affinity(values.view());
    if !diag.is_valid() {
        let hint = if diag.nonzero_diagonal.is_empty() {
            ""
        } else {
            " (the diagonal can be zeroed explicitly)"
        };
        return Err(Error::InvalidInput(format!("{}{hint}", diag.summary())));
    }
    AffinityMatrix::new(values)
}

pub fn read_affinity_file(path: impl AsRef<Path>, repair_diagonal: bool) -> Result<AffinityMatrix> {
    read_affinity(File::open(path)?, repair_diagonal)
}
