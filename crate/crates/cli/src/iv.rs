use lola::ivpipe::{baseline_run, dictionary_iv, stability_run, IvStabilityReport, IvTask};
use lola::simgen::gen_endogenous;
use lola::SelectorRegistry;
use serde::Serialize;

use crate::bundle::{ReportBundle, Rows};
use crate::config::{IvConfig, IvData, RunConfig};
use crate::data::{fmt_f64, read_table};
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct IvReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub instrument_labels: Vec<String>,
    pub controlled: IvStabilityReport,
    /// The same subsamples without instruments.
    pub baseline: Option<IvStabilityReport>,
}

struct Loaded {
    y: Vec<f64>,
    x: Vec<f64>,
    z: lola::Matrix,
    labels: Vec<String>,
    dropped: usize,
}

fn load(data: &IvData, bundle: &mut ReportBundle) -> CliResult<Loaded> {
    match data {
        IvData::Synthetic(spec) => {
            let d = gen_endogenous(spec)?;
            let labels = (0..d.z.cols()).map(|j| format!("z{j}")).collect();
            Ok(Loaded {
                y: d.y,
                x: d.x,
                z: d.z,
                labels,
                dropped: 0,
            })
        }
        IvData::Csv { path, y, x, instruments } => {
            let table = read_table(path)?;
            let labels = match instruments {
                Some(v) => v.clone(),
                None => table.others(&[y.as_str(), x.as_str()]),
            };
            let mut used = labels.clone();
            used.extend([y.clone(), x.clone()]);
            let (rows, dropped) = table.complete_rows(&used)?;
            if dropped > 0 {
                bundle.log(format!("dropped {dropped} rows with missing values"));
            }
            Ok(Loaded {
                y: table.vector(y, &rows)?,
                x: table.vector(x, &rows)?,
                z: table.matrix(&labels, &rows)?,
                labels,
                dropped,
            })
        }
    }
}

fn summary_row(name: &str, r: &IvStabilityReport) -> Vec<String> {
    vec![
        name.to_string(),
        r.k.to_string(),
        r.succeeded.to_string(),
        fmt_f64(r.s_hat.mean),
        fmt_f64(r.s_hat.se),
        fmt_f64(r.alpha2_hat.mean),
        fmt_f64(r.alpha2_hat.se),
        fmt_f64(r.ci_lo.mean),
        fmt_f64(r.ci_lo.se),
        fmt_f64(r.ci_hi.mean),
        fmt_f64(r.ci_hi.se),
        fmt_f64(r.r2.mean),
        fmt_f64(r.r2.se),
        fmt_f64(r.f_pvalue.mean),
        fmt_f64(r.f_pvalue.se),
        fmt_f64(r.n0),
    ]
}

pub fn run(cfg: &IvConfig, full: &RunConfig, bundle: &mut ReportBundle) -> CliResult<()> {
    cfg.params.validate()?;
    let selector = SelectorRegistry::with_builtins().build(&cfg.selector, &cfg.selector_params)?;
    let data = load(&cfg.data, bundle)?;
    let rows_used = data.y.len();
    let (task, controlled) = match &cfg.dictionary {
        Some(sizes) => dictionary_iv(&data.y, &data.x, &sizes.spec(rows_used), cfg.params, selector.as_ref())?,
        None => {
            let task = IvTask::new(data.y, data.x, data.z, data.labels, cfg.params)?;
            let report = stability_run(&task, selector.as_ref())?;
            (task, report)
        }
    };
    let baseline = if cfg.baseline { Some(baseline_run(&task)?) } else { None };
    bundle.log(format!(
        "{} of {} subsamples succeeded; mean alpha2 {:.4}, zero in interval {:.3}",
        controlled.succeeded, controlled.k, controlled.alpha2_hat.mean, controlled.n0
    ));
    for f in &controlled.failures {
        bundle.log(format!("subsample {} failed: {}", f.rep, f.reason));
    }

    let headers = [
        "model", "k", "succeeded", "s_hat_mean", "s_hat_se", "alpha2_mean", "alpha2_se", "ci_lo_mean", "ci_lo_se",
        "ci_hi_mean", "ci_hi_se", "r2_mean", "r2_se", "f_pvalue_mean", "f_pvalue_se", "n0",
    ];
    let mut summary = vec![summary_row(&cfg.selector, &controlled)];
    if let Some(b) = &baseline {
        summary.push(summary_row("no_instruments", b));
    }
    bundle.table("iv_summary", &headers, &summary)?;

    let runs: Rows = controlled
        .runs
        .iter()
        .map(|r| {
            vec![
                r.rep.to_string(),
                r.s_hat.to_string(),
                fmt_f64(r.alpha2_hat),
                fmt_f64(r.stderr),
                fmt_f64(r.ci_lo),
                fmt_f64(r.ci_hi),
                (r.contains_zero as u8).to_string(),
                fmt_f64(r.r2),
                fmt_f64(r.f_pvalue),
                r.dof.to_string(),
                r.selected_labels.join(";"),
            ]
        })
        .collect();
    bundle.table(
        "runs",
        &[
            "rep", "s_hat", "alpha2_hat", "stderr", "ci_lo", "ci_hi", "contains_zero", "r2", "f_pvalue", "dof",
            "selected",
        ],
        &runs,
    )?;
    let freq: Rows = task
        .z_labels
        .iter()
        .zip(&controlled.selection_frequency)
        .map(|(l, f)| vec![l.clone(), fmt_f64(*f)])
        .collect();
    bundle.table("selection_frequency", &["instrument", "frequency"], &freq)?;

    let base_by_rep = |rep: usize| {
        baseline
            .as_ref()
            .and_then(|b| b.runs.iter().find(|r| r.rep == rep))
            .map(|r| fmt_f64(r.alpha2_hat))
            .unwrap_or_default()
    };
    let samples: Rows = controlled
        .runs
        .iter()
        .map(|r| vec![r.rep.to_string(), fmt_f64(r.alpha2_hat), base_by_rep(r.rep)])
        .collect();
    bundle.plot("alpha2_samples", &["rep", "alpha2_hat", "alpha2_no_instruments"], &samples)?;

    bundle.report(&IvReport {
        version: lola::VERSION,
        config: full.clone(),
        rows_used,
        rows_dropped: data.dropped,
        instrument_labels: task.z_labels.clone(),
        controlled,
        baseline,
    })
}
