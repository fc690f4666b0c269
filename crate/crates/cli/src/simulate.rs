use lola::ivpipe::{subsample_rows, MeanSe};
use lola::select::{baseline_stepwise, baseline_student, confusion, stage1_loss};
use lola::simgen::{augment_artificial, housing_style_base, simulate, ArtificialLaw, SimScenario};
use lola::{SelectionReport, Selector, SelectorRegistry};
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{ReportBundle, Rows};
use crate::config::{Experiment, HousingConfig, RunConfig, SimulateConfig};
use crate::data::fmt_f64;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct SparseRun {
    pub rep: usize,
    pub seed: u64,
    /// Selector error; the run then counts as an empty selection.
    pub failure: Option<String>,
    pub leaders: Option<usize>,
    pub selected: usize,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub stage1_loss: Option<usize>,
    pub t_used: Option<f64>,
    pub s_used: Option<f64>,
    pub coherence: Option<f64>,
    pub eta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseSummary {
    pub selector: String,
    pub reps: usize,
    pub failures: usize,
    pub p: usize,
    pub support_size: usize,
    pub tp: MeanSe,
    pub tn: MeanSe,
    pub fp: MeanSe,
    pub fn_: MeanSe,
    pub leaders: MeanSe,
    pub stage1_loss: MeanSe,
    pub coherence: MeanSe,
}

#[derive(Debug, Clone, Serialize)]
pub struct Illustration {
    pub rep: usize,
    pub t_used: f64,
    pub s_used: f64,
    pub leaders: Vec<usize>,
    pub selected: Vec<usize>,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub summary: SparseSummary,
    pub illustration: Option<Illustration>,
    pub runs: Vec<SparseRun>,
}

fn mean_of<T>(runs: &[SparseRun], f: impl Fn(&SparseRun) -> Option<T>) -> MeanSe
where
    T: Into<f64>,
{
    let v: Vec<f64> = runs.iter().filter_map(|r| f(r).map(Into::into)).collect();
    MeanSe::of(&v)
}

fn usize_f(v: usize) -> f64 {
    v as f64
}

struct RepOutcome {
    run: SparseRun,
    report: Option<SelectionReport>,
    support: Vec<usize>,
    correlations_p: usize,
}

fn sparse_rep(sc: &SimScenario, rep: usize, selector: &dyn Selector) -> CliResult<RepOutcome> {
    let seed = sc.seed.wrapping_add(rep as u64);
    let scenario = SimScenario { seed, ..*sc };
    let draw = simulate(&scenario)?;
    let (selected, report, failure) = match selector.select(&draw.x, &draw.y) {
        Ok(out) => (out.selected, out.report, None),
        Err(e) => (Vec::new(), None, Some(e.to_string())),
    };
    let c = confusion(&selected, &draw.truth.support, sc.p);
    let run = SparseRun {
        rep,
        seed,
        failure,
        leaders: report.as_ref().map(|r| r.leaders.len()),
        selected: selected.len(),
        tp: c.tp,
        tn: c.tn,
        fp: c.fp,
        fn_: c.fn_,
        stage1_loss: report.as_ref().map(|r| stage1_loss(r, &draw.truth.support)),
        t_used: report.as_ref().map(|r| r.t_used),
        s_used: report.as_ref().map(|r| r.s_used),
        coherence: report.as_ref().map(|r| r.coherence),
        eta: draw.truth.eta,
    };
    Ok(RepOutcome {
        run,
        report: if rep == 0 { report } else { None },
        support: draw.truth.support,
        correlations_p: sc.p,
    })
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run_sparse(cfg: &SimulateConfig, sc: &SimScenario, full: &RunConfig, bundle: &mut ReportBundle) -> CliResult<()> {
    sc.validate()?;
    if cfg.reps == 0 {
        return Err(CliError::Config("reps must be >= 1".into()));
    }
    let selector = SelectorRegistry::with_builtins().build(&cfg.selector, &cfg.selector_params)?;
    let outcomes: Vec<RepOutcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| sparse_rep(sc, rep, selector.as_ref()))
        .collect::<CliResult<_>>()?;

    let mut illustration = None;
    let mut plots: Option<(Rows, Rows)> = None;
    if let Some(first) = outcomes.first() {
        if let Some(r) = &first.report {
            let in_support = |j: usize| first.support.binary_search(&j).is_ok();
            let screening: Rows = (0..first.correlations_p)
                .map(|j| {
                    vec![
                        j.to_string(),
                        fmt_f64(r.correlations[j]),
                        flag(r.leaders.binary_search(&j).is_ok()),
                        flag(in_support(j)),
                    ]
                })
                .collect();
            let coefficients: Rows = r
                .leaders
                .iter()
                .map(|&j| {
                    vec![
                        j.to_string(),
                        fmt_f64(r.beta_hat_std[j]),
                        flag(r.selected.binary_search(&j).is_ok()),
                        flag(in_support(j)),
                    ]
                })
                .collect();
            plots = Some((screening, coefficients));
            illustration = Some(Illustration {
                rep: 0,
                t_used: r.t_used,
                s_used: r.s_used,
                leaders: r.leaders.clone(),
                selected: r.selected.clone(),
                support: first.support.clone(),
            });
        }
    }
    let runs: Vec<SparseRun> = outcomes.into_iter().map(|o| o.run).collect();
    let failures = runs.iter().filter(|r| r.failure.is_some()).count();
    let summary = SparseSummary {
        selector: cfg.selector.clone(),
        reps: cfg.reps,
        failures,
        p: sc.p,
        support_size: sc.support_size,
        tp: mean_of(&runs, |r| Some(usize_f(r.tp))),
        tn: mean_of(&runs, |r| Some(usize_f(r.tn))),
        fp: mean_of(&runs, |r| Some(usize_f(r.fp))),
        fn_: mean_of(&runs, |r| Some(usize_f(r.fn_))),
        leaders: mean_of(&runs, |r| r.leaders.map(usize_f)),
        stage1_loss: mean_of(&runs, |r| r.stage1_loss.map(usize_f)),
        coherence: mean_of(&runs, |r| r.coherence),
    };
    bundle.log(format!(
        "{} replications, {} selector failures; mean TP {:.2}, FP {:.2}, FN {:.2}",
        cfg.reps, failures, summary.tp.mean, summary.fp.mean, summary.fn_.mean
    ));

    let s = &summary;
    bundle.table(
        "table1",
        &[
            "selector", "tp_mean", "tp_se", "tp_truth", "tn_mean", "tn_se", "tn_truth", "fp_mean", "fp_se",
            "fn_mean", "fn_se", "leaders_mean", "stage1_loss_mean", "coherence_mean", "failures",
        ],
        &vec![vec![
            s.selector.clone(),
            fmt_f64(s.tp.mean),
            fmt_f64(s.tp.se),
            s.support_size.to_string(),
            fmt_f64(s.tn.mean),
            fmt_f64(s.tn.se),
            (s.p - s.support_size).to_string(),
            fmt_f64(s.fp.mean),
            fmt_f64(s.fp.se),
            fmt_f64(s.fn_.mean),
            fmt_f64(s.fn_.se),
            fmt_f64(s.leaders.mean),
            fmt_f64(s.stage1_loss.mean),
            fmt_f64(s.coherence.mean),
            s.failures.to_string(),
        ]],
    )?;
    let rows: Rows = runs
        .iter()
        .map(|r| {
            vec![
                r.rep.to_string(),
                r.seed.to_string(),
                opt(r.leaders),
                r.selected.to_string(),
                r.tp.to_string(),
                r.tn.to_string(),
                r.fp.to_string(),
                r.fn_.to_string(),
                opt(r.stage1_loss),
                r.t_used.map(fmt_f64).unwrap_or_default(),
                r.s_used.map(fmt_f64).unwrap_or_default(),
                r.coherence.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.eta),
                r.failure.clone().unwrap_or_default(),
            ]
        })
        .collect();
    bundle.table(
        "runs",
        &[
            "rep", "seed", "leaders", "selected", "tp", "tn", "fp", "fn", "stage1_loss", "t_used", "s_used",
            "coherence", "eta", "failure",
        ],
        &rows,
    )?;
    if let Some((screening, coefficients)) = plots {
        bundle.plot("screening", &["index", "correlation", "leader", "in_support"], &screening)?;
        bundle.plot("coefficients", &["index", "beta_hat_std", "selected", "in_support"], &coefficients)?;
    }
    bundle.report(&SparseReport {
        version: lola::VERSION,
        config: full.clone(),
        summary,
        illustration,
        runs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HousingRun {
    pub rep: usize,
    pub failure: Option<String>,
    pub selected_base: Vec<usize>,
    pub artificial_by_law: Vec<usize>,
    pub coherence: Option<f64>,
    pub student: Option<Vec<usize>>,
    pub stepwise: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LawCount {
    pub law: &'static str,
    pub selections: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HousingSummary {
    pub selector: String,
    pub reps: usize,
    pub failures: usize,
    pub rows_per_run: usize,
    pub artificial_columns: usize,
    pub artificial_selections: usize,
    pub heavy_tailed_selections: usize,
    pub heavy_tailed_share: f64,
    pub by_law: Vec<LawCount>,
    pub coherence: MeanSe,
    /// Per base column: selection frequency of the selector, then of the
    /// Student and stepwise baselines.
    pub base_frequency: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HousingReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub summary: HousingSummary,
    pub runs: Vec<HousingRun>,
}

pub fn run_housing(cfg: &SimulateConfig, h: &HousingConfig, full: &RunConfig, bundle: &mut ReportBundle) -> CliResult<()> {
    if !(h.fraction > 0.0 && h.fraction <= 1.0) {
        return Err(CliError::Config(format!("fraction {} outside (0, 1]", h.fraction)));
    }
    if cfg.reps == 0 || h.per_dist == 0 {
        return Err(CliError::Config("reps and per_dist must be >= 1".into()));
    }
    let selector = SelectorRegistry::with_builtins().build(&cfg.selector, &cfg.selector_params)?;
    let base = housing_style_base(h.n, h.seed)?;
    let size = ((h.fraction * h.n as f64).floor() as usize).max(1);
    let p0 = base.x.cols();
    let level = cfg.selector_params.level;

    let runs: Vec<HousingRun> = (1..=cfg.reps)
        .into_par_iter()
        .map(|rep| -> CliResult<HousingRun> {
            let rows = subsample_rows(h.n, size, h.seed, rep);
            let x0 = base.x.select_rows(&rows);
            let y: Vec<f64> = rows.iter().map(|&i| base.y[i]).collect();
            let aug = augment_artificial(&x0, h.per_dist, h.seed.wrapping_add(rep as u64))?;
            let mut run = HousingRun {
                rep,
                failure: None,
                selected_base: Vec::new(),
                artificial_by_law: vec![0; ArtificialLaw::ALL.len()],
                coherence: None,
                student: None,
                stepwise: None,
            };
            match selector.select(&aug.x, &y) {
                Ok(out) => {
                    run.coherence = out.report.as_ref().map(|r| r.coherence);
                    for j in out.selected {
                        match aug.law_of(j) {
                            None => run.selected_base.push(j),
                            Some(law) => {
                                let b = ArtificialLaw::ALL.iter().position(|&l| l == law).expect("known law");
                                run.artificial_by_law[b] += 1;
                            }
                        }
                    }
                }
                Err(e) => run.failure = Some(e.to_string()),
            }
            if h.baselines {
                run.student = Some(baseline_student(&x0, &y, level)?);
                run.stepwise = Some(baseline_stepwise(&x0, &y, level)?);
            }
            Ok(run)
        })
        .collect::<CliResult<_>>()?;

    let reps = runs.len() as f64;
    let mut freq = vec![[0.0; 3]; p0];
    for r in &runs {
        for &j in &r.selected_base {
            freq[j][0] += 1.0 / reps;
        }
        for (slot, sel) in [(1, &r.student), (2, &r.stepwise)] {
            for &j in sel.iter().flatten() {
                freq[j][slot] += 1.0 / reps;
            }
        }
    }
    let by_law: Vec<LawCount> = ArtificialLaw::ALL
        .iter()
        .enumerate()
        .map(|(b, law)| LawCount {
            law: law.name(),
            selections: runs.iter().map(|r| r.artificial_by_law[b]).sum(),
        })
        .collect();
    let total: usize = by_law.iter().map(|l| l.selections).sum();
    let heavy: usize = ArtificialLaw::ALL
        .iter()
        .zip(&by_law)
        .filter(|(law, _)| law.is_heavy_tailed())
        .map(|(_, c)| c.selections)
        .sum();
    let coh: Vec<f64> = runs.iter().filter_map(|r| r.coherence).collect();
    let summary = HousingSummary {
        selector: cfg.selector.clone(),
        reps: cfg.reps,
        failures: runs.iter().filter(|r| r.failure.is_some()).count(),
        rows_per_run: size,
        artificial_columns: ArtificialLaw::ALL.len() * h.per_dist,
        artificial_selections: total,
        heavy_tailed_selections: heavy,
        heavy_tailed_share: if total > 0 { heavy as f64 / total as f64 } else { 0.0 },
        by_law,
        coherence: MeanSe::of(&coh),
        base_frequency: freq,
    };
    bundle.log(format!(
        "{} replications on {} rows; {} artificial selections, {} heavy tailed",
        cfg.reps, size, total, heavy
    ));

    let s = &summary;
    bundle.table(
        "artificial",
        &["law", "selections"],
        &s.by_law.iter().map(|l| vec![l.law.to_string(), l.selections.to_string()]).collect(),
    )?;
    bundle.table(
        "housing_summary",
        &[
            "selector", "reps", "failures", "artificial_selections", "heavy_tailed_selections",
            "heavy_tailed_share", "coherence_mean",
        ],
        &vec![vec![
            s.selector.clone(),
            s.reps.to_string(),
            s.failures.to_string(),
            s.artificial_selections.to_string(),
            s.heavy_tailed_selections.to_string(),
            fmt_f64(s.heavy_tailed_share),
            fmt_f64(s.coherence.mean),
        ]],
    )?;
    let freq_rows: Rows = s
        .base_frequency
        .iter()
        .enumerate()
        .map(|(j, f)| vec![format!("x{j}"), fmt_f64(f[0]), fmt_f64(f[1]), fmt_f64(f[2])])
        .collect();
    bundle.table("frequencies", &["column", "selector", "student", "stepwise"], &freq_rows)?;
    bundle.plot("frequencies", &["column", "selector", "student", "stepwise"], &freq_rows)?;
    bundle.report(&HousingReport {
        version: lola::VERSION,
        config: full.clone(),
        summary,
        runs,
    })
}

pub fn run(cfg: &SimulateConfig, full: &RunConfig, bundle: &mut ReportBundle) -> CliResult<()> {
    match &cfg.experiment {
        Experiment::Sparse { scenario } => run_sparse(cfg, scenario, full, bundle),
        Experiment::Housing(h) => run_housing(cfg, h, full, bundle),
    }
}
