//! Output directory layout: `report.json`, `tables/*.csv`,
//! `plotdata/*.csv` and `log.txt`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::data::{write_matrix_csv, write_text};
use crate::error::{CliError, CliResult};

pub struct ReportBundle {
    dir: PathBuf,
    log: Vec<String>,
    files: Vec<PathBuf>,
}

/// Rows of a CSV table, already formatted.
pub type Rows = Vec<Vec<String>>;

impl ReportBundle {
    pub fn create(dir: &Path) -> CliResult<Self> {
        for sub in ["tables", "plotdata"] {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))?;
        }
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            dir: dir.to_path_buf(),
            log: vec![format!("started at unix time {started}")],
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    pub fn report<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Format(format!("report serialization: {e}")))?;
        text.push('\n');
        self.write("report.json", &text)
    }

    pub fn table(&mut self, name: &str, headers: &[&str], rows: &Rows) -> CliResult<()> {
        self.csv(&format!("tables/{name}.csv"), headers, rows)
    }

    pub fn plot(&mut self, name: &str, headers: &[&str], rows: &Rows) -> CliResult<()> {
        self.csv(&format!("plotdata/{name}.csv"), headers, rows)
    }

    /// Any other file at `rel` under the bundle directory.
    pub fn write(&mut self, rel: &str, text: &str) -> CliResult<()> {
        let p = self.dir.join(rel);
        write_text(&p, text)?;
        self.files.push(p);
        Ok(())
    }

    pub fn matrix(&mut self, rel: &str, headers: &[String], m: &lola::Matrix) -> CliResult<()> {
        let p = self.dir.join(rel);
        write_matrix_csv(&p, headers, m)?;
        self.files.push(p);
        Ok(())
    }

    fn csv(&mut self, rel: &str, headers: &[&str], rows: &Rows) -> CliResult<()> {
        let p = self.dir.join(rel);
        let fmt = |e: csv::Error| CliError::Format(format!("{}: {e}", p.display()));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(headers).map_err(fmt)?;
        for r in rows {
            w.write_record(r).map_err(fmt)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Format(e.to_string()))?;
        fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        self.files.push(p);
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        let listing: Vec<String> = self
            .files
            .iter()
            .map(|f| format!("wrote {}", f.strip_prefix(&self.dir).unwrap_or(f).display()))
            .collect();
        self.log.extend(listing);
        let mut text = self.log.join("\n");
        text.push('\n');
        write_text(&self.dir.join("log.txt"), &text)?;
        Ok(self.dir)
    }
}
