//! CSV datasets, sweep CSV and JSON reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle is lossless.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mmdalign_core::Dataset;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::sweep::SweepRow;

pub const LABEL_COLUMN: &str = "label";

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> AppError {
    AppError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_cell(path: &Path, line: u64, cell: &str) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {cell:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value: {cell:?}")));
    }
    Ok(v)
}

/// Reads a numeric CSV. With `label_column`, that header column becomes the
/// integer label vector and is removed from the features.
pub fn read_dataset_csv(path: &Path, has_header: bool, label_column: Option<&str>) -> Result<Dataset> {
    if label_column.is_some() && !has_header {
        return Err(AppError::Usage("a label column needs a header row".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let label_idx = match label_column {
        Some(name) => {
            let headers = rdr.headers().map_err(|e| csv_error(path, e))?;
            let idx = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| parse_err(path, 1, format!("unknown label column {name:?}")))?;
            Some(idx)
        }
        None => None,
    };
    let mut width: Option<usize> = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut nrows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(parse_err(path, line, format!("expected {w} fields, found {}", rec.len())))
            }
            Some(_) => {}
        }
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_idx {
                let l: i64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(path, line, format!("label is not an integer: {cell:?}")))?;
                labels.push(l);
            } else {
                data.push(parse_cell(path, line, cell)?);
            }
        }
        nrows += 1;
    }
    let ncols = width.unwrap_or(0) - usize::from(label_idx.is_some() && width.is_some());
    let values = DMatrix::from_row_slice(nrows, ncols, &data);
    Ok(match label_idx {
        Some(_) => Dataset::with_labels(values, labels)?,
        None => Dataset::new(values)?,
    })
}

/// Reads a CSV, treating the first row as a header when any of its cells is
/// not a number and taking the `label` column when present.
pub fn read_dataset_auto(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let first = match rdr.records().next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return read_dataset_csv(path, false, None),
    };
    let has_header = first.iter().any(|c| c.trim().parse::<f64>().is_err());
    let has_label = has_header && first.iter().any(|c| c.trim() == LABEL_COLUMN);
    read_dataset_csv(path, has_header, has_label.then_some(LABEL_COLUMN))
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| AppError::Usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp: PathBuf = dir.join(tmp_name);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| AppError::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| AppError::io(&tmp, e))?;
        f.sync_all().map_err(|e| AppError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| AppError::io(path, e))
}

/// Header `f0,…,f{d−1}` plus `label` when present.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = (0..ds.ncols()).map(|j| format!("f{j}")).collect();
    if ds.labels().is_some() {
        header.push(LABEL_COLUMN.into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..ds.nrows() {
        let mut cells: Vec<String> = ds.values().row(i).iter().map(|v| v.to_string()).collect();
        if let Some(l) = ds.labels() {
            cells.push(l[i].to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_dataset_csv(ds: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, dataset_to_csv(ds).as_bytes())
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("family,alpha,mmd2\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.family, r.alpha, r.mmd2));
    }
    out
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_atomic(path, sweep_to_csv(rows).as_bytes())
}

/// Pretty JSON with a trailing newline.
pub fn write_report<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Family;

    fn tmp(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, content).unwrap();
        (dir, p)
    }

    #[test]
    fn plain_two_by_two() {
        let (_d, p) = tmp("1,2\n3,4\n");
        let ds = read_dataset_csv(&p, false, None).unwrap();
        assert_eq!(ds.values(), &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert!(ds.labels().is_none());
    }

    #[test]
    fn header_with_label() {
        let (_d, p) = tmp("f0,f1,label\n0,1,1\n");
        let ds = read_dataset_csv(&p, true, Some("label")).unwrap();
        assert_eq!(ds.values(), &DMatrix::from_row_slice(1, 2, &[0.0, 1.0]));
        assert_eq!(ds.labels().unwrap(), &[1]);
        assert_eq!(read_dataset_auto(&p).unwrap(), ds);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let (_d, p) = tmp("1,2\n3,4\n5\n");
        match read_dataset_csv(&p, false, None) {
            Err(AppError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let (_d, p) = tmp("a,b\n1,2\n1,x\n");
        match read_dataset_csv(&p, true, None) {
            Err(AppError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let (_d, p) = tmp("a,b\n1,2\n");
        assert!(matches!(read_dataset_csv(&p, true, Some("label")), Err(AppError::Parse { line: 1, .. })));
    }

    #[test]
    fn sweep_csv_header() {
        let rows = [SweepRow { family: Family::Reflection, alpha: 0.5, mmd2: 0.25 }];
        assert_eq!(sweep_to_csv(&rows), "family,alpha,mmd2\nreflection,0.5,0.25\n");
    }
}
