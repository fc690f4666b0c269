//! CSV input and output.
//!
//! Comma separated, UTF-8, header row required, `.` decimal separator.
//! An empty cell is a missing value; rows missing any used column are
//! dropped and counted.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use lola::Matrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    /// Column-major cells; `None` is missing.
    pub columns: Vec<Vec<Option<f64>>>,
}

fn parse_cell(s: &str) -> Option<Result<f64, ()>> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    Some(t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(()))
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::Format(format!("{}: missing header row", path.display())));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = headers.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(CliError::Format(format!("{}: duplicate column `{dup}`", path.display())));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for (c, cell) in rec.iter().enumerate() {
            let v = match parse_cell(cell) {
                None => None,
                Some(Ok(v)) => Some(v),
                Some(Err(())) => {
                    return Err(CliError::Data {
                        path: path.to_path_buf(),
                        row: r + 1,
                        column: headers[c].clone(),
                        message: format!("`{cell}` is not a finite number"),
                    })
                }
            };
            columns[c].push(v);
        }
    }
    Ok(Table {
        path: path.to_path_buf(),
        headers,
        columns,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if let csv::ErrorKind::Io(_) = e.kind() {
        let csv::ErrorKind::Io(io) = e.into_kind() else { unreachable!() };
        return CliError::io(path, io);
    }
    CliError::Format(format!("{}: {e}", path.display()))
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn index_of(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: no column `{name}`", self.path.display())))
    }

    /// Column names other than `exclude`, in file order.
    pub fn others(&self, exclude: &[&str]) -> Vec<String> {
        self.headers
            .iter()
            .filter(|h| !exclude.contains(&h.as_str()))
            .cloned()
            .collect()
    }

    /// Rows with a value in every named column, and how many were dropped.
    pub fn complete_rows(&self, names: &[String]) -> CliResult<(Vec<usize>, usize)> {
        let idx: Vec<usize> = names.iter().map(|n| self.index_of(n)).collect::<CliResult<_>>()?;
        let rows: Vec<usize> = (0..self.rows())
            .filter(|&r| idx.iter().all(|&c| self.columns[c][r].is_some()))
            .collect();
        let dropped = self.rows() - rows.len();
        Ok((rows, dropped))
    }

    pub fn vector(&self, name: &str, rows: &[usize]) -> CliResult<Vec<f64>> {
        let c = self.index_of(name)?;
        Ok(rows.iter().map(|&r| self.columns[c][r].expect("complete row")).collect())
    }

    pub fn matrix(&self, names: &[String], rows: &[usize]) -> CliResult<Matrix> {
        let cols: Vec<Vec<f64>> = names
            .iter()
            .map(|n| self.vector(n, rows))
            .collect::<CliResult<_>>()?;
        if cols.is_empty() {
            return Ok(Matrix::zeros(rows.len(), 0));
        }
        Matrix::from_columns(&cols).map_err(CliError::from)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

pub fn write_matrix_csv(path: &Path, headers: &[String], m: &Matrix) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io = |e: csv::Error| CliError::Format(format!("{}: {e}", path.display()));
    w.write_record(headers).map_err(io)?;
    for i in 0..m.rows() {
        w.write_record((0..m.cols()).map(|j| fmt_f64(m.get(i, j)))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}
