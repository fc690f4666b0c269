use lola::ivpipe::subsample_rows;
use lola::simgen::augment_artificial;
use lola::{Matrix, SelectorRegistry};
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{ReportBundle, Rows};
use crate::config::{RunConfig, SelectConfig};
use crate::data::{fmt_f64, read_table};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct SelectRun {
    pub rep: usize,
    pub rows: usize,
    pub selected: Vec<String>,
    pub artificial_selected: usize,
    pub leaders: Option<usize>,
    pub t_used: Option<f64>,
    pub s_used: Option<f64>,
    pub coherence: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnSummary {
    pub column: String,
    /// Selection frequency over the runs.
    pub frequency: f64,
    /// Correlation with the target and least-squares coefficient from the
    /// first run, when the column reached the leader set.
    pub correlation: Option<f64>,
    pub beta_hat: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub columns: Vec<ColumnSummary>,
    pub runs: Vec<SelectRun>,
}

pub fn run(cfg: &SelectConfig, full: &RunConfig, bundle: &mut ReportBundle) -> CliResult<()> {
    if cfg.reps == 0 {
        return Err(CliError::Config("reps must be >= 1".into()));
    }
    if let Some(f) = cfg.subsample {
        if !(f > 0.0 && f <= 1.0) {
            return Err(CliError::Config(format!("subsample fraction {f} outside (0, 1]")));
        }
    }
    let table = read_table(&cfg.data)?;
    table.index_of(&cfg.target)?;
    let predictors = match &cfg.predictors {
        Some(p) => p.clone(),
        None => table.others(&[cfg.target.as_str()]),
    };
    if predictors.is_empty() {
        return Err(CliError::Config("no predictor columns".into()));
    }
    let mut used = predictors.clone();
    used.push(cfg.target.clone());
    let (rows, dropped) = table.complete_rows(&used)?;
    if dropped > 0 {
        bundle.log(format!("dropped {dropped} rows with missing values"));
    }
    let x = table.matrix(&predictors, &rows)?;
    let y = table.vector(&cfg.target, &rows)?;
    let n = rows.len();
    let selector = SelectorRegistry::with_builtins().build(&cfg.selector, &cfg.selector_params)?;

    let reps = if cfg.subsample.is_none() && cfg.augment.is_none() { 1 } else { cfg.reps };
    let size = cfg.subsample.map_or(n, |f| ((f * n as f64).floor() as usize).max(1));
    let p0 = predictors.len();

    let results: Vec<(SelectRun, Vec<usize>, Option<(Vec<f64>, Vec<Option<f64>>)>)> = (1..=reps)
        .into_par_iter()
        .map(|rep| -> CliResult<_> {
            let r = subsample_rows(n, size, cfg.seed, rep);
            let xs = x.select_rows(&r);
            let ys: Vec<f64> = r.iter().map(|&i| y[i]).collect();
            let (design, labels): (Matrix, Vec<String>) = match cfg.augment {
                Some(k) => {
                    let aug = augment_artificial(&xs, k, cfg.seed.wrapping_add(rep as u64))?;
                    let mut labels = predictors.clone();
                    for b in &aug.blocks {
                        labels.extend(b.columns.clone().map(|j| format!("{}_{}", b.law.name(), j - p0)));
                    }
                    (aug.x, labels)
                }
                None => (xs, predictors.clone()),
            };
            let mut run = SelectRun {
                rep,
                rows: r.len(),
                selected: Vec::new(),
                artificial_selected: 0,
                leaders: None,
                t_used: None,
                s_used: None,
                coherence: None,
                failure: None,
            };
            let mut base_sel = Vec::new();
            let mut first = None;
            match selector.select(&design, &ys) {
                Ok(out) => {
                    run.selected = out.selected.iter().map(|&j| labels[j].clone()).collect();
                    run.artificial_selected = out.selected.iter().filter(|&&j| j >= p0).count();
                    base_sel = out.selected.iter().copied().filter(|&j| j < p0).collect();
                    if let Some(rep) = &out.report {
                        run.leaders = Some(rep.leaders.len());
                        run.t_used = Some(rep.t_used);
                        run.s_used = Some(rep.s_used);
                        run.coherence = Some(rep.coherence);
                        let beta = (0..p0)
                            .map(|j| rep.leaders.binary_search(&j).is_ok().then(|| rep.beta_hat[j]))
                            .collect();
                        first = Some((rep.correlations[..p0].to_vec(), beta));
                    }
                }
                Err(e) => run.failure = Some(e.to_string()),
            }
            Ok((run, base_sel, first))
        })
        .collect::<CliResult<_>>()?;

    let mut freq = vec![0.0; p0];
    for (_, sel, _) in &results {
        for &j in sel {
            freq[j] += 1.0 / reps as f64;
        }
    }
    let first = results.first().and_then(|r| r.2.clone());
    let columns: Vec<ColumnSummary> = predictors
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (corr, beta) = match &first {
                Some((c, b)) => (Some(c[j]), b[j]),
                None => (None, None),
            };
            ColumnSummary {
                column: name.clone(),
                frequency: freq[j],
                correlation: corr,
                beta_hat: beta,
            }
        })
        .collect();
    let runs: Vec<SelectRun> = results.into_iter().map(|r| r.0).collect();
    bundle.log(format!("{reps} runs on {size} of {n} rows"));

    let col_rows: Rows = columns
        .iter()
        .map(|c| {
            vec![
                c.column.clone(),
                fmt_f64(c.frequency),
                c.correlation.map(fmt_f64).unwrap_or_default(),
                c.beta_hat.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    bundle.table("selection", &["column", "frequency", "correlation", "beta_hat"], &col_rows)?;
    let run_rows: Rows = runs
        .iter()
        .map(|r| {
            vec![
                r.rep.to_string(),
                r.rows.to_string(),
                r.selected.len().to_string(),
                r.artificial_selected.to_string(),
                r.leaders.map(|v| v.to_string()).unwrap_or_default(),
                r.t_used.map(fmt_f64).unwrap_or_default(),
                r.s_used.map(fmt_f64).unwrap_or_default(),
                r.coherence.map(fmt_f64).unwrap_or_default(),
                r.selected.join(";"),
                r.failure.clone().unwrap_or_default(),
            ]
        })
        .collect();
    bundle.table(
        "runs",
        &[
            "rep", "rows", "selected", "artificial_selected", "leaders", "t_used", "s_used", "coherence",
            "columns", "failure",
        ],
        &run_rows,
    )?;
    if first.is_some() {
        let plot: Rows = columns
            .iter()
            .map(|c| vec![c.column.clone(), c.correlation.map(fmt_f64).unwrap_or_default()])
            .collect();
        bundle.plot("screening", &["column", "correlation"], &plot)?;
    }
    bundle.report(&SelectReport {
        version: lola::VERSION,
        config: full.clone(),
        rows_used: n,
        rows_dropped: dropped,
        columns,
        runs,
    })
}
