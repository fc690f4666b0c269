//! Leader screening, least squares on the leaders and the second
//! coefficient threshold.
//!
//! Screening statistics are `c_ℓ = |X̃_ℓᵀ Y| / n` on the standardized
//! design, which puts a manual `t` on the same scale as the coherence.
//! Second-stage thresholds compare coefficients of the *normalized*
//! columns.

pub mod baseline;
pub mod metrics;
pub mod registry;

pub use baseline::{baseline_stepwise, baseline_student};
pub use metrics::{check_conditions, confusion, stage1_loss, ConditionDiagnostics, Confusion};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix, StandardizedDesign};
use crate::split::{deviance_split, BoundaryRule, SplitResult};

/// How the leader count is capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapMode {
    /// At most `⌊1/τₙ⌋` leaders.
    Theory,
    /// Whatever clears the threshold, up to `max_leaders`.
    #[default]
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    Manual,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LolaOptions {
    pub cap_mode: CapMode,
    /// Cap for [`CapMode::Adaptive`]; `None` means `min(n − 2, p)`.
    pub max_leaders: Option<usize>,
    pub boundary: BoundaryRule,
    pub standardize_tol: f64,
    pub rank_tol: f64,
}

impl Default for LolaOptions {
    fn default() -> Self {
        Self {
            cap_mode: CapMode::Adaptive,
            max_leaders: None,
            boundary: BoundaryRule::Strict,
            standardize_tol: linalg::DEFAULT_STANDARDIZE_TOL,
            rank_tol: linalg::DEFAULT_RANK_TOL,
        }
    }
}

/// Short record of one [`SplitResult`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSummary {
    pub split_index: usize,
    pub threshold: f64,
    pub display_threshold: f64,
    pub degenerate: bool,
    pub size: usize,
}

impl From<&SplitResult> for SplitSummary {
    fn from(s: &SplitResult) -> Self {
        Self {
            split_index: s.split_index,
            threshold: s.threshold,
            display_threshold: s.display_threshold,
            degenerate: s.degenerate,
            size: s.deviance_curve.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    /// Leader set 𝒥, ascending.
    pub leaders: Vec<usize>,
    /// Selected set Î ⊆ 𝒥, ascending.
    pub selected: Vec<usize>,
    pub t_used: f64,
    pub s_used: f64,
    pub cap_used: usize,
    /// Coefficients on the original column scale, zero outside 𝒥.
    pub beta_hat: Vec<f64>,
    /// Coefficients of the normalized columns, `σ_ℓ β̂_ℓ`.
    pub beta_hat_std: Vec<f64>,
    /// `|X̃_ℓᵀ Y| / n`, zero for dropped columns.
    pub correlations: Vec<f64>,
    pub scales: Vec<f64>,
    pub dropped: Vec<usize>,
    pub coherence: f64,
    pub cap_mode: CapMode,
    pub mode: ThresholdMode,
    pub boundary: BoundaryRule,
    pub screening_split: Option<SplitSummary>,
    pub coefficient_split: Option<SplitSummary>,
    pub ols_rank: usize,
}

impl SelectionReport {
    pub fn p(&self) -> usize {
        self.beta_hat.len()
    }
}

/// `c_ℓ = |X̃_ℓᵀ Y| / n` for retained columns, 0 for dropped ones.
pub fn screening_correlations(sd: &StandardizedDesign, y: &[f64]) -> Vec<f64> {
    let n = sd.n() as f64;
    let mut c = vec![0.0; sd.p()];
    for &j in &sd.retained {
        c[j] = (dot(sd.xt.col(j), y) / n).abs();
    }
    c
}

fn check_inputs(x: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} rows, design has {}",
            y.len(),
            x.rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    if x.rows() < 3 {
        return Err(Error::Domain(format!("need at least 3 rows, got {}", x.rows())));
    }
    Ok(())
}

fn theory_cap(coherence: f64) -> usize {
    if coherence > 0.0 {
        (1.0 / coherence).floor() as usize
    } else {
        usize::MAX
    }
}

fn leader_cap(sd: &StandardizedDesign, cap_mode: CapMode, max_leaders: Option<usize>) -> usize {
    let dof_cap = sd.n() - 2;
    let cap = match cap_mode {
        CapMode::Theory => theory_cap(sd.coherence),
        CapMode::Adaptive => max_leaders.unwrap_or(sd.p()),
    };
    cap.min(dof_cap).min(sd.p())
}

/// Keeps the `cap` candidates with the largest `c`, ties to the smaller
/// index; returns them ascending.
fn top_by_correlation(mut candidates: Vec<usize>, c: &[f64], cap: usize) -> Vec<usize> {
    if candidates.len() > cap {
        candidates.sort_by(|&a, &b| c[b].total_cmp(&c[a]).then(a.cmp(&b)));
        candidates.truncate(cap);
    }
    candidates.sort_unstable();
    candidates
}

/// Leader set for a manual screening threshold `t` (on the `c_ℓ` scale).
///
/// `Theory` keeps `c_ℓ ≥ max(c₍⌊1/τₙ⌋₎, t)` in descending order, at most
/// `⌊1/τₙ⌋` of them. `Adaptive` keeps `c_ℓ > t` up to `max_leaders`.
/// Both truncate to the `n − 2` largest.
pub fn select_leaders(
    sd: &StandardizedDesign,
    y: &[f64],
    t: f64,
    cap_mode: CapMode,
    max_leaders: Option<usize>,
) -> Result<Vec<usize>> {
    if y.len() != sd.n() {
        return Err(Error::DimensionMismatch("response length".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("screening threshold {t} must be >= 0")));
    }
    let c = screening_correlations(sd, y);
    let cap = leader_cap(sd, cap_mode, max_leaders);
    let candidates: Vec<usize> = match cap_mode {
        CapMode::Theory => {
            let mut desc: Vec<f64> = sd.retained.iter().map(|&j| c[j]).collect();
            desc.sort_by(|a, b| b.total_cmp(a));
            let rank = theory_cap(sd.coherence).clamp(1, desc.len());
            let cut = desc[rank - 1].max(t);
            sd.retained.iter().copied().filter(|&j| c[j] >= cut).collect()
        }
        CapMode::Adaptive => sd.retained.iter().copied().filter(|&j| c[j] > t).collect(),
    };
    let leaders = top_by_correlation(candidates, &c, cap);
    if leaders.is_empty() {
        return Err(Error::NoLeaders);
    }
    Ok(leaders)
}

struct LeaderFit {
    coeffs: Vec<f64>,
    rank: usize,
}

fn fit_leaders(sd: &StandardizedDesign, y: &[f64], leaders: &[usize], rank_tol: f64) -> Result<LeaderFit> {
    let fit = linalg::ols_subset(&sd.xt, y, leaders, rank_tol)?;
    Ok(LeaderFit {
        coeffs: fit.coeffs,
        rank: fit.rank,
    })
}

fn scatter(sd: &StandardizedDesign, leaders: &[usize], coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut beta_std = vec![0.0; sd.p()];
    let mut beta = vec![0.0; sd.p()];
    for (&j, &b) in leaders.iter().zip(coeffs) {
        beta_std[j] = b;
        beta[j] = b / sd.scales[j];
    }
    (beta, beta_std)
}

/// LOL with user thresholds: leaders by [`select_leaders`], then
/// `Î = {ℓ ∈ 𝒥 : |β̂_ℓ| ≥ s}` on the normalized scale.
pub fn lol(x: &Matrix, y: &[f64], t: f64, s: f64, opts: &LolaOptions) -> Result<SelectionReport> {
    check_inputs(x, y)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("coefficient threshold {s} must be >= 0")));
    }
    let sd = linalg::standardize(x, opts.standardize_tol)?;
    let correlations = screening_correlations(&sd, y);
    let leaders = select_leaders(&sd, y, t, opts.cap_mode, opts.max_leaders)?;
    let fit = fit_leaders(&sd, y, &leaders, opts.rank_tol)?;
    let selected: Vec<usize> = leaders
        .iter()
        .zip(&fit.coeffs)
        .filter(|(_, b)| b.abs() >= s)
        .map(|(&j, _)| j)
        .collect();
    let (beta_hat, beta_hat_std) = scatter(&sd, &leaders, &fit.coeffs);
    Ok(SelectionReport {
        cap_used: leader_cap(&sd, opts.cap_mode, opts.max_leaders),
        leaders,
        selected,
        t_used: t,
        s_used: s,
        beta_hat,
        beta_hat_std,
        correlations,
        scales: sd.scales.clone(),
        dropped: sd.dropped.clone(),
        coherence: sd.coherence,
        cap_mode: opts.cap_mode,
        mode: ThresholdMode::Manual,
        boundary: opts.boundary,
        screening_split: None,
        coefficient_split: None,
        ols_rank: fit.rank,
    })
}

/// LOL with both thresholds chosen by [`deviance_split`]: first on the
/// screening correlations, then on `|β̂_ℓ|` for `ℓ = 1..p`, where `β̂_ℓ = 0`
/// outside the leaders.
///
/// When every `|β̂_ℓ|` is equal the leaders are kept whole (`s_used = 0`).
pub fn lola(x: &Matrix, y: &[f64], opts: &LolaOptions) -> Result<SelectionReport> {
    check_inputs(x, y)?;
    if x.rows() < 4 {
        return Err(Error::Domain(format!("need at least 4 rows, got {}", x.rows())));
    }
    let sd = linalg::standardize(x, opts.standardize_tol)?;
    if sd.retained.len() < 2 {
        return Err(Error::TooFewColumns(sd.retained.len()));
    }
    let correlations = screening_correlations(&sd, y);
    let screen_values: Vec<f64> = sd.retained.iter().map(|&j| correlations[j]).collect();
    let screen = deviance_split(&screen_values)?;
    if screen.degenerate {
        return Err(Error::ScreeningSplitDegenerate);
    }
    let cap = leader_cap(&sd, opts.cap_mode, opts.max_leaders);
    let candidates: Vec<usize> = screen
        .selected(opts.boundary)
        .into_iter()
        .map(|k| sd.retained[k])
        .collect();
    let leaders = top_by_correlation(candidates, &correlations, cap);
    if leaders.is_empty() {
        return Err(Error::NoLeaders);
    }

    let fit = fit_leaders(&sd, y, &leaders, opts.rank_tol)?;
    let (beta_hat, beta_hat_std) = scatter(&sd, &leaders, &fit.coeffs);
    // The split runs over all p coefficients, zero outside the leaders.
    let coef_split = deviance_split(&beta_hat_std)?;
    let (selected, s_used) = if coef_split.degenerate {
        (leaders.clone(), 0.0)
    } else {
        let kept = coef_split
            .selected(opts.boundary)
            .into_iter()
            .filter(|j| leaders.binary_search(j).is_ok())
            .collect();
        (kept, coef_split.threshold)
    };
    let coefficient_split = Some(SplitSummary::from(&coef_split));
    Ok(SelectionReport {
        leaders,
        selected,
        t_used: screen.threshold,
        s_used,
        cap_used: cap,
        beta_hat,
        beta_hat_std,
        correlations,
        scales: sd.scales.clone(),
        dropped: sd.dropped.clone(),
        coherence: sd.coherence,
        cap_mode: opts.cap_mode,
        mode: ThresholdMode::Adaptive,
        boundary: opts.boundary,
        screening_split: Some(SplitSummary::from(&screen)),
        coefficient_split,
        ols_rank: fit.rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::standardize;

    /// Rows of a scaled Hadamard-like design: columns are orthogonal with
    /// unit second moment.
    fn walsh(n: usize, p: usize) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                (0..n)
                    .map(|i| if ((i & (j + 1)).count_ones() % 2) == 0 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        Matrix::from_columns(&cols).unwrap()
    }

    #[test]
    fn single_active_orthogonal_column() {
        let x = walsh(16, 6);
        let sd = standardize(&x, 1e-12).unwrap();
        assert!(sd.coherence < 1e-12);
        let y: Vec<f64> = sd.xt.col(3).iter().map(|v| 2.0 * v).collect();
        let leaders = select_leaders(&sd, &y, 1.0, CapMode::Adaptive, None).unwrap();
        assert_eq!(leaders, vec![3]);
    }

    #[test]
    fn duplicate_design_caps_theory_at_one() {
        let a = vec![1.0, -2.0, 0.5, 3.0, -1.0, 0.2];
        let b = vec![0.3, 1.0, -1.5, 0.1, 2.0, -0.7];
        let x = Matrix::from_columns(&[a.clone(), a.clone(), b.clone()]).unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        assert!((sd.coherence - 1.0).abs() < 1e-12);
        let y: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + 0.5 * v).collect();
        let leaders = select_leaders(&sd, &y, 0.0, CapMode::Theory, None).unwrap();
        assert_eq!(leaders.len(), 1);
    }

    #[test]
    fn noiseless_lol_recovers_support() {
        let x = walsh(32, 12);
        let support = [0usize, 3, 5, 8, 11];
        let mut beta = vec![0.0; 12];
        for (k, &j) in support.iter().enumerate() {
            beta[j] = if k % 2 == 0 { 2.0 } else { -2.0 };
        }
        let y = x.mul_vec(&beta);
        let r = lol(&x, &y, 1.0, 1.0, &LolaOptions::default()).unwrap();
        assert_eq!(r.selected, support.to_vec());
        let r = lola(&x, &y, &LolaOptions::default()).unwrap();
        assert_eq!(r.selected, support.to_vec());
    }

    #[test]
    fn infinite_threshold_has_no_leaders() {
        let x = walsh(16, 4);
        let y = x.mul_vec(&[1.0, 0.0, 0.0, 2.0]);
        let err = lol(&x, &y, f64::INFINITY, 0.0, &LolaOptions::default()).unwrap_err();
        assert_eq!(err, Error::NoLeaders);
    }

    #[test]
    fn zero_response_is_a_degenerate_screen() {
        let x = walsh(16, 4);
        let err = lola(&x, &[0.0; 16], &LolaOptions::default()).unwrap_err();
        assert_eq!(err, Error::ScreeningSplitDegenerate);
    }

    #[test]
    fn leaders_never_exceed_n_minus_two() {
        let x = walsh(8, 7);
        let y = x.mul_vec(&[1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6]);
        let sd = standardize(&x, 1e-12).unwrap();
        let leaders = select_leaders(&sd, &y, 0.0, CapMode::Adaptive, None).unwrap();
        assert_eq!(leaders.len(), 6);
        // The two weakest are the ones truncated.
        assert_eq!(leaders, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn report_shapes() {
        let x = walsh(32, 10);
        let mut beta = vec![0.0; 10];
        beta[2] = 3.0;
        beta[7] = -2.5;
        let mut y = x.mul_vec(&beta);
        y[0] += 0.01;
        let r = lola(&x, &y, &LolaOptions::default()).unwrap();
        assert_eq!(r.p(), 10);
        assert!(r.selected.iter().all(|j| r.leaders.contains(j)));
        for j in 0..10 {
            if !r.leaders.contains(&j) {
                assert_eq!(r.beta_hat[j], 0.0);
            }
        }
        assert_eq!(r.leaders, vec![2, 7]);
        // The zeros outside the leaders form the lower cluster.
        assert_eq!(r.selected, vec![2, 7]);
        assert_eq!(r.s_used, 0.0);
    }
}
