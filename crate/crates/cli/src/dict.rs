use lola::simgen::{dictionary_design, DictLabel, DictionarySpec};
use serde::Serialize;

use crate::bundle::ReportBundle;
use crate::config::{DictConfig, RunConfig};
use crate::error::{CliError, CliResult};

/// Written next to `dictionary.csv`; column `j` of the CSV is `labels[j]`.
#[derive(Debug, Clone, Serialize)]
pub struct DictReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub spec: DictionarySpec,
    pub rows: usize,
    pub columns: usize,
    pub labels: Vec<DictLabel>,
}

pub fn run(cfg: &DictConfig, full: &RunConfig, bundle: &mut ReportBundle) -> CliResult<()> {
    let dict = dictionary_design(&cfg.spec)?;
    let headers: Vec<String> = dict.labels.iter().map(|l| l.to_string()).collect();
    bundle.matrix("dictionary.csv", &headers, &dict.z)?;
    let report = DictReport {
        version: lola::VERSION,
        config: full.clone(),
        spec: cfg.spec,
        rows: dict.z.rows(),
        columns: dict.z.cols(),
        labels: dict.labels,
    };
    let mut text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Format(format!("dictionary labels: {e}")))?;
    text.push('\n');
    bundle.write("dictionary.json", &text)?;
    bundle.log(format!("{} x {} dictionary", report.rows, report.columns));
    bundle.report(&report)
}
