//! Data-driven threshold: split the sorted absolute values into a lower
//! and an upper cluster so that the total within-cluster squared deviation
//! is minimal.
//!
//! With `|Z|₍₁₎ ≤ … ≤ |Z|₍ₘ₎` the deviance of the split after rank `J` is
//!
//! ```text
//! dev(J) = Σ_{j≤J} (|Z|₍ⱼ₎ − mean₋(J))² + Σ_{j>J} (|Z|₍ⱼ₎ − mean₊(J))²
//! ```
//!
//! for `J = 1..m` (the upper cluster is empty at `J = m`). The chosen rank
//! `Ĵ` is the smallest minimizer and the threshold is `u = |Z|₍Ĵ₎`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Spreads at or below this fraction of the largest value count as a
/// constant sample.
pub const DEGENERATE_RTOL: f64 = 1e-9;

/// Curve values within this fraction of `Σ|Z|²` of the minimum are ties.
const TIE_RTOL: f64 = 1e-12;

/// Which side of the boundary an element equal to `u` lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRule {
    /// Keep values strictly above `u`.
    #[default]
    Strict,
    /// Keep values `≥ u`; the largest lower-cluster element is kept too.
    Inclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitResult {
    /// `Ĵ`, 1-based rank of the last lower-cluster element.
    pub split_index: usize,
    /// `u = |Z|₍Ĵ₎`.
    pub threshold: f64,
    /// Midpoint between `|Z|₍Ĵ₎` and `|Z|₍Ĵ₊₁₎`, or `u` when `Ĵ = m`.
    pub display_threshold: f64,
    /// `dev(J)` for `J = 1..m`.
    pub deviance_curve: Vec<f64>,
    /// Positions with `|value| > u`, ascending. Empty when degenerate.
    pub upper_set: Vec<usize>,
    /// All absolute values equal up to [`DEGENERATE_RTOL`].
    pub degenerate: bool,
    abs_values: Vec<f64>,
}

impl SplitResult {
    /// Positions kept under `rule`, ascending.
    pub fn selected(&self, rule: BoundaryRule) -> Vec<usize> {
        match rule {
            BoundaryRule::Strict => self.upper_set.clone(),
            BoundaryRule::Inclusive => {
                if self.degenerate {
                    return Vec::new();
                }
                self.abs_values
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v >= self.threshold)
                    .map(|(i, _)| i)
                    .collect()
            }
        }
    }

    /// The cut actually applied under `rule` (`> u` or `≥ u`).
    pub fn keeps(&self, value: f64, rule: BoundaryRule) -> bool {
        !self.degenerate
            && match rule {
                BoundaryRule::Strict => value.abs() > self.threshold,
                BoundaryRule::Inclusive => value.abs() >= self.threshold,
            }
    }
}

fn prepare(values: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    if values.len() < 2 {
        return Err(Error::TooFewValues(values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("split input"));
    }
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]).then(a.cmp(&b)));
    Ok((abs, order))
}

fn finish(abs: Vec<f64>, order: &[usize], curve: Vec<f64>) -> SplitResult {
    let m = abs.len();
    let sorted: Vec<f64> = order.iter().map(|&i| abs[i]).collect();
    let scale: f64 = sorted.iter().map(|v| v * v).sum();
    let min = curve.iter().cloned().fold(f64::INFINITY, f64::min);
    let tie = TIE_RTOL * scale;
    let j_hat = curve.iter().position(|&d| d <= min + tie).unwrap_or(0) + 1;

    let lo = sorted[0];
    let hi = sorted[m - 1];
    let degenerate = hi - lo <= DEGENERATE_RTOL * hi;
    let threshold = sorted[j_hat - 1];
    let display_threshold = if j_hat < m {
        0.5 * (sorted[j_hat - 1] + sorted[j_hat])
    } else {
        threshold
    };
    let upper_set = if degenerate {
        Vec::new()
    } else {
        (0..m).filter(|&i| abs[i] > threshold).collect()
    };
    SplitResult {
        split_index: j_hat,
        threshold,
        display_threshold,
        deviance_curve: curve,
        upper_set,
        degenerate,
        abs_values: abs,
    }
}

/// Two-cluster deviance split in `O(m log m)`: one sort, then every
/// `dev(J)` from prefix sums of the centered values and their squares.
pub fn deviance_split(values: &[f64]) -> Result<SplitResult> {
    let (abs, order) = prepare(values)?;
    let m = abs.len();
    // dev(J) is shift invariant; centering keeps the prefix sums small.
    let center = abs.iter().sum::<f64>() / m as f64;
    let mut s1 = vec![0.0; m + 1];
    let mut s2 = vec![0.0; m + 1];
    for (k, &i) in order.iter().enumerate() {
        let v = abs[i] - center;
        s1[k + 1] = s1[k] + v;
        s2[k + 1] = s2[k] + v * v;
    }
    let (t1, t2) = (s1[m], s2[m]);
    let curve = (1..=m)
        .map(|j| {
            let lower = s2[j] - s1[j] * s1[j] / j as f64;
            let upper = if j < m {
                let (u1, u2) = (t1 - s1[j], t2 - s2[j]);
                u2 - u1 * u1 / (m - j) as f64
            } else {
                0.0
            };
            lower.max(0.0) + upper.max(0.0)
        })
        .collect();
    Ok(finish(abs, &order, curve))
}

/// Same contract as [`deviance_split`], re-summing both clusters for every
/// candidate rank. `O(m²)`; a reference for testing.
pub fn deviance_split_oracle(values: &[f64]) -> Result<SplitResult> {
    let (abs, order) = prepare(values)?;
    let sorted: Vec<f64> = order.iter().map(|&i| abs[i]).collect();
    let m = sorted.len();
    let ss = |xs: &[f64]| -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean) * (x - mean)).sum()
    };
    let curve = (1..=m).map(|j| ss(&sorted[..j]) + ss(&sorted[j..])).collect();
    Ok(finish(abs, &order, curve))
}
