//! Instrument selection and control-variable inference for a focal
//! regressor.
//!
//! Instruments are chosen from `Z` either to explain `X` (Model 1) or to
//! explain `Y` once the intercept and `X` are partialled out (Model 2).
//! The selected columns then enter `Y = α₁ + α₂X + Z_sel β + u` as
//! controls, and `α₂` is estimated by OLS with a t interval. The whole
//! procedure is repeated on random subsamples to measure its stability.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ols_subset, student_quantile, InferenceStatus, Matrix, Projector, DEFAULT_RANK_TOL};
use crate::select::registry::Selector;
use crate::simgen::{dictionary_design, DictionarySpec};

/// Runs above this failure fraction abort the stability study.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;
const MIN_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IvMode {
    /// Instruments explain `X`.
    #[default]
    Model1,
    /// Instruments explain `Y` alongside the intercept and `X`.
    Model2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvParams {
    pub mode: IvMode,
    pub ci_level: f64,
    pub reps: usize,
    pub fraction: f64,
    pub seed: u64,
}

impl Default for IvParams {
    fn default() -> Self {
        Self {
            mode: IvMode::Model1,
            ci_level: 0.90,
            reps: 1000,
            fraction: 0.85,
            seed: 0,
        }
    }
}

impl IvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Domain(format!("ci_level {} outside (0, 1)", self.ci_level)));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Domain(format!("fraction {} outside (0, 1]", self.fraction)));
        }
        if self.reps == 0 {
            return Err(Error::Domain("reps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IvTask {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Matrix,
    pub z_labels: Vec<String>,
    pub params: IvParams,
}

impl IvTask {
    pub fn new(y: Vec<f64>, x: Vec<f64>, z: Matrix, z_labels: Vec<String>, params: IvParams) -> Result<Self> {
        let n = y.len();
        if x.len() != n || z.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "Y has {n} rows, X has {}, Z has {}",
                x.len(),
                z.rows()
            )));
        }
        if z_labels.len() != z.cols() {
            return Err(Error::DimensionMismatch("one label per instrument column".into()));
        }
        if z.cols() == 0 {
            return Err(Error::EmptyDictionary);
        }
        if y.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Y or X"));
        }
        if !z.is_finite() {
            return Err(Error::NonFinite("Z"));
        }
        params.validate()?;
        Ok(Self {
            y,
            x,
            z,
            z_labels,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn subsample_size(&self) -> usize {
        ((self.params.fraction * self.n() as f64).floor() as usize).max(1)
    }
}

fn intercept_and(x: &[f64]) -> Matrix {
    Matrix::from_columns(&[vec![1.0; x.len()], x.to_vec()]).expect("equal lengths")
}

/// `v` minus its least-squares projection on the columns of `c`.
pub fn residualize(v: &[f64], c: &Matrix) -> Vec<f64> {
    Projector::new(c).residual(v)
}

pub fn residualize_matrix(m: &Matrix, c: &Matrix) -> Matrix {
    Projector::new(c).residual_matrix(m)
}

fn pick(v: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&i| v[i]).collect()
}

/// Instrument indices chosen on `rows`.
pub fn select_instruments(task: &IvTask, rows: &[usize], selector: &dyn Selector) -> Result<Vec<usize>> {
    if rows.len() < MIN_ROWS {
        return Err(Error::Domain(format!("at least {MIN_ROWS} rows, got {}", rows.len())));
    }
    let z = task.z.select_rows(rows);
    let x = pick(&task.x, rows);
    let out = match task.params.mode {
        IvMode::Model1 => selector.select(&z, &x)?,
        IvMode::Model2 => {
            let proj = Projector::new(&intercept_and(&x));
            let zt = proj.residual_matrix(&z);
            let yt = proj.residual(&pick(&task.y, rows));
            selector.select(&zt, &yt)?
        }
    };
    Ok(out.selected)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvRunResult {
    /// Replication index, 1-based; 0 outside a stability study.
    pub rep: usize,
    pub s_hat: usize,
    pub selected: Vec<usize>,
    pub selected_labels: Vec<String>,
    pub alpha2_hat: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub contains_zero: bool,
    pub r2: f64,
    pub f_pvalue: f64,
    pub dof: usize,
}

/// OLS of `Y` on `[1, X, Z_sel]` over `rows` with a `ci_level` interval
/// for the coefficient of `X`.
pub fn fit_control_model(
    y: &[f64],
    x: &[f64],
    z: &Matrix,
    selected: &[usize],
    rows: &[usize],
    ci_level: f64,
) -> Result<IvRunResult> {
    if 2 + selected.len() >= rows.len() {
        return Err(Error::NoResidualDof);
    }
    let xs = pick(x, rows);
    let mut design = intercept_and(&xs);
    if !selected.is_empty() {
        design = design.hcat(&z.select_rows(rows).select_cols(selected))?;
    }
    let ys = pick(y, rows);
    let cols: Vec<usize> = (0..design.cols()).collect();
    let fit = ols_subset(&design, &ys, &cols, DEFAULT_RANK_TOL)?;
    if fit.status == InferenceStatus::NoResidualDof {
        return Err(Error::NoResidualDof);
    }
    let se = fit.stderrs[1];
    if se.is_nan() {
        return Err(Error::FocalCollinear);
    }
    let alpha2 = fit.coeffs[1];
    let q = student_quantile((1.0 + ci_level) / 2.0, fit.dof_resid as f64)?;
    let (ci_lo, ci_hi) = (alpha2 - q * se, alpha2 + q * se);
    Ok(IvRunResult {
        rep: 0,
        s_hat: selected.len(),
        selected: selected.to_vec(),
        selected_labels: Vec::new(),
        alpha2_hat: alpha2,
        stderr: se,
        ci_lo,
        ci_hi,
        contains_zero: ci_lo <= 0.0 && 0.0 <= ci_hi,
        r2: fit.r2,
        f_pvalue: fit.f_pvalue,
        dof: fit.dof_resid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `√K`.
    pub se: f64,
}

impl MeanSe {
    pub fn of(v: &[f64]) -> Self {
        let k = v.len() as f64;
        if v.is_empty() {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / k;
        if v.len() < 2 {
            return Self { mean, se: 0.0 };
        }
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        Self {
            mean,
            se: var.sqrt() / k.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunFailure {
    pub rep: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IvStabilityReport {
    /// Requested replications.
    pub k: usize,
    pub succeeded: usize,
    pub failures: Vec<RunFailure>,
    pub s_hat: MeanSe,
    pub alpha2_hat: MeanSe,
    pub ci_lo: MeanSe,
    pub ci_hi: MeanSe,
    pub r2: MeanSe,
    pub f_pvalue: MeanSe,
    /// Fraction of successful runs whose interval contains zero.
    pub n0: f64,
    pub selection_frequency: Vec<f64>,
    pub alpha2_samples: Vec<f64>,
    pub runs: Vec<IvRunResult>,
}

/// Rows of replication `rep`, ascending. `f = 1` returns every row.
pub fn subsample_rows(n: usize, size: usize, seed: u64, rep: usize) -> Vec<usize> {
    if size >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ rep as u64);
    let mut rows = index::sample(&mut rng, n, size).into_vec();
    rows.sort_unstable();
    rows
}

fn aggregate(task: &IvTask, outcomes: Vec<Result<IvRunResult>>) -> Result<IvStabilityReport> {
    let k = outcomes.len();
    let mut runs = Vec::with_capacity(k);
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(mut r) => {
                r.rep = i + 1;
                r.selected_labels = r.selected.iter().map(|&j| task.z_labels[j].clone()).collect();
                runs.push(r)
            }
            Err(e) => failures.push(RunFailure {
                rep: i + 1,
                reason: e.to_string(),
            }),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * k as f64 || runs.is_empty() {
        return Err(Error::PipelineUnstable {
            failed: failures.len(),
            total: k,
        });
    }
    let col = |f: fn(&IvRunResult) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
    let alpha2_samples = col(|r| r.alpha2_hat);
    let mut freq = vec![0.0; task.z.cols()];
    for r in &runs {
        for &j in &r.selected {
            freq[j] += 1.0;
        }
    }
    let m = runs.len() as f64;
    freq.iter_mut().for_each(|f| *f /= m);
    Ok(IvStabilityReport {
        k,
        succeeded: runs.len(),
        failures,
        s_hat: MeanSe::of(&col(|r| r.s_hat as f64)),
        alpha2_hat: MeanSe::of(&alpha2_samples),
        ci_lo: MeanSe::of(&col(|r| r.ci_lo)),
        ci_hi: MeanSe::of(&col(|r| r.ci_hi)),
        r2: MeanSe::of(&col(|r| r.r2)),
        f_pvalue: MeanSe::of(&col(|r| r.f_pvalue)),
        n0: runs.iter().filter(|r| r.contains_zero).count() as f64 / m,
        selection_frequency: freq,
        alpha2_samples,
        runs,
    })
}

fn replicate<F>(task: &IvTask, run: F) -> Result<IvStabilityReport>
where
    F: Fn(&[usize]) -> Result<IvRunResult> + Sync,
{
    let (n, size) = (task.n(), task.subsample_size());
    let outcomes: Vec<Result<IvRunResult>> = (1..=task.params.reps)
        .into_par_iter()
        .map(|rep| run(&subsample_rows(n, size, task.params.seed, rep)))
        .collect();
    aggregate(task, outcomes)
}

/// Selection and control-model fit on `K` subsamples of `⌊f·n⌋` rows.
pub fn stability_run(task: &IvTask, selector: &dyn Selector) -> Result<IvStabilityReport> {
    replicate(task, |rows| {
        let sel = select_instruments(task, rows, selector)?;
        fit_control_model(&task.y, &task.x, &task.z, &sel, rows, task.params.ci_level)
    })
}

/// `Y = α₁ + α₂X + u` on the same subsamples, without instruments.
pub fn baseline_run(task: &IvTask) -> Result<IvStabilityReport> {
    replicate(task, |rows| {
        fit_control_model(&task.y, &task.x, &task.z, &[], rows, task.params.ci_level)
    })
}

/// Sorts the rows by `X`, replaces `Z` by a function dictionary on the
/// grid and runs the stability study.
pub fn dictionary_iv(
    y: &[f64],
    x: &[f64],
    spec: &DictionarySpec,
    params: IvParams,
    selector: &dyn Selector,
) -> Result<(IvTask, IvStabilityReport)> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch("Y and X lengths differ".into()));
    }
    if spec.n != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary grid has {} points, data has {} rows",
            spec.n,
            x.len()
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let xs = pick(x, &order);
    let ys = pick(y, &order);
    let dict = dictionary_design(spec)?;
    let labels = dict.labels.iter().map(|l| l.to_string()).collect();
    let task = IvTask::new(ys, xs, dict.z, labels, params)?;
    let report = stability_run(&task, selector)?;
    Ok((task, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::registry::{Lola, SelectorOutput};
    use crate::simgen::{gen_endogenous, EndogenousSpec};

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    fn labels(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("z{j}")).collect()
    }

    #[test]
    fn residualize_span_and_centering() {
        let c = Matrix::from_columns(&[vec![1.0; 4], vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let r = residualize(&[3.0, 5.0, 7.0, 9.0], &c);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let ones = Matrix::from_columns(&[vec![1.0; 3]]).unwrap();
        let r = residualize(&[1.0, 2.0, 6.0], &ones);
        for (a, b) in r.iter().zip([-2.0, -1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_line_without_controls() {
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 0.2 * v).collect();
        let rows: Vec<usize> = (0..12).collect();
        let z = Matrix::zeros(12, 1);
        let r = fit_control_model(&y, &x, &z, &[], &rows, 0.9).unwrap();
        assert!((r.alpha2_hat + 0.2).abs() < 1e-12);
        assert!(r.ci_lo <= r.alpha2_hat && r.alpha2_hat <= r.ci_hi);
    }

    #[test]
    fn no_dof_is_an_error() {
        let x = vec![1.0, 2.0, 3.0];
        let z = Matrix::from_columns(&[vec![0.5, 0.1, 0.3]]).unwrap();
        assert_eq!(
            fit_control_model(&[1.0, 2.0, 4.0], &x, &z, &[0], &[0, 1, 2], 0.9),
            Err(Error::NoResidualDof)
        );
    }

    #[test]
    fn wider_level_nests() {
        let mut r = lcg(3);
        let x: Vec<f64> = (0..30).map(|_| r()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + r()).collect();
        let rows: Vec<usize> = (0..30).collect();
        let z = Matrix::zeros(30, 1);
        let a = fit_control_model(&y, &x, &z, &[], &rows, 0.90).unwrap();
        let b = fit_control_model(&y, &x, &z, &[], &rows, 0.95).unwrap();
        assert!(b.ci_lo < a.ci_lo && a.ci_hi < b.ci_hi);
    }

    #[test]
    fn perfect_instrument_is_selected_under_model2() {
        let mut r = lcg(8);
        let n = 60;
        let x: Vec<f64> = (0..n).map(|_| r()).collect();
        let w: Vec<f64> = (0..n).map(|_| r()).collect();
        let y: Vec<f64> = x.iter().zip(&w).map(|(a, b)| -0.2 * a + b).collect();
        let mut cols: Vec<Vec<f64>> = (0..20).map(|_| (0..n).map(|_| r()).collect()).collect();
        cols[7] = y.iter().zip(&x).map(|(a, b)| a + 0.2 * b).collect();
        let z = Matrix::from_columns(&cols).unwrap();
        let params = IvParams {
            mode: IvMode::Model2,
            reps: 10,
            ..IvParams::default()
        };
        let task = IvTask::new(y, x, z, labels(20), params).unwrap();
        let lola = Lola { opts: Default::default() };
        let rep = stability_run(&task, &lola).unwrap();
        assert_eq!(rep.selection_frequency[7], 1.0);
    }

    #[test]
    fn n0_is_the_fraction_of_covering_runs() {
        let d = gen_endogenous(&EndogenousSpec::new(-0.2, 5)).unwrap();
        let params = IvParams {
            reps: 20,
            seed: 5,
            ..IvParams::default()
        };
        let p = d.z.cols();
        let task = IvTask::new(d.y, d.x, d.z, labels(p), params).unwrap();
        let rep = stability_run(&task, &Lola { opts: Default::default() }).unwrap();
        let covering = rep.runs.iter().filter(|r| r.ci_lo <= 0.0 && 0.0 <= r.ci_hi).count();
        assert_eq!(rep.n0, covering as f64 / rep.succeeded as f64);
        assert_eq!(rep.alpha2_samples.len(), rep.succeeded);
        assert!(rep.selection_frequency.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn full_data_single_run() {
        let d = gen_endogenous(&EndogenousSpec::new(-0.2, 6)).unwrap();
        let params = IvParams {
            reps: 1,
            fraction: 1.0,
            ..IvParams::default()
        };
        let p = d.z.cols();
        let task = IvTask::new(d.y, d.x, d.z, labels(p), params).unwrap();
        let rep = baseline_run(&task).unwrap();
        assert_eq!(rep.k, 1);
        assert_eq!(rep.runs[0].dof, 148);
    }

    #[test]
    fn too_many_failures_abort() {
        struct Fails;
        impl Selector for Fails {
            fn name(&self) -> &str {
                "fails"
            }
            fn select(&self, _: &Matrix, _: &[f64]) -> Result<SelectorOutput> {
                Err(Error::NoLeaders)
            }
        }
        let d = gen_endogenous(&EndogenousSpec::new(0.0, 1)).unwrap();
        let params = IvParams {
            reps: 5,
            ..IvParams::default()
        };
        let p = d.z.cols();
        let task = IvTask::new(d.y, d.x, d.z, labels(p), params).unwrap();
        assert!(matches!(
            stability_run(&task, &Fails),
            Err(Error::PipelineUnstable { failed: 5, total: 5 })
        ));
    }

    #[test]
    fn empty_dictionary_errors() {
        let spec = DictionarySpec {
            n: 20,
            n_cos: 0,
            n_sin: 0,
            n_box: 0,
            j_max: 0,
            seed: 0,
            profile: Default::default(),
        };
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let lola = Lola { opts: Default::default() };
        assert!(dictionary_iv(&x, &x, &spec, IvParams::default(), &lola).is_err());
    }
}
