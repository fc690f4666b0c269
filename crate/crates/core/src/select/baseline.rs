//! Classical low-dimensional selectors used as benchmarks.

use crate::error::{Error, Result};
use crate::linalg::{f_sf, ols_subset, Matrix, DEFAULT_RANK_TOL};

fn with_intercept(x: &Matrix) -> Matrix {
    Matrix::from_columns(&[vec![1.0; x.rows()]])
        .expect("one column")
        .hcat(x)
        .expect("same rows")
}

fn check(x: &Matrix, y: &[f64], level: f64) -> Result<()> {
    if x.cols() + 1 >= x.rows() {
        return Err(Error::TooManyPredictors { p: x.cols(), n: x.rows() });
    }
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch("response length".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level {level} outside (0, 1)")));
    }
    Ok(())
}

/// Full OLS with intercept; keeps predictors whose two-sided t-test
/// p-value is below `1 − level`.
pub fn baseline_student(x: &Matrix, y: &[f64], level: f64) -> Result<Vec<usize>> {
    check(x, y, level)?;
    let design = with_intercept(x);
    let cols: Vec<usize> = (0..design.cols()).collect();
    let fit = ols_subset(&design, y, &cols, DEFAULT_RANK_TOL)?;
    let alpha = 1.0 - level;
    Ok((0..x.cols())
        .filter(|&j| fit.coef_pvalue(j + 1) < alpha)
        .collect())
}

/// Residual sum of squares and rank of `y` on intercept + `vars`.
fn rss_of(design: &Matrix, y: &[f64], vars: &[usize]) -> Result<(f64, usize)> {
    let mut cols = Vec::with_capacity(vars.len() + 1);
    cols.push(0);
    cols.extend(vars.iter().map(|v| v + 1));
    let fit = ols_subset(design, y, &cols, DEFAULT_RANK_TOL)?;
    Ok((fit.rss, fit.rank))
}

/// p-value of the partial F test comparing a model with `rank_small`
/// parameters to one with `rank_big`.
fn partial_f_pvalue(rss_small: f64, rss_big: f64, rank_small: usize, rank_big: usize, n: usize) -> f64 {
    if rank_big <= rank_small || rank_big >= n {
        return 1.0;
    }
    let df1 = (rank_big - rank_small) as f64;
    let df2 = (n - rank_big) as f64;
    let drop = (rss_small - rss_big).max(0.0);
    if rss_big <= 0.0 {
        return if drop > 0.0 { 0.0 } else { 1.0 };
    }
    let f = (drop / df1) / (rss_big / df2);
    f_sf(f, df1, df2).unwrap_or(1.0)
}

/// Forward selection with an entry F test at `1 − level`, each entry
/// followed by backward removal of variables whose partial F p-value rose
/// above the same level. Ties go to the smallest column index.
pub fn baseline_stepwise(x: &Matrix, y: &[f64], level: f64) -> Result<Vec<usize>> {
    check(x, y, level)?;
    let n = x.rows();
    let alpha = 1.0 - level;
    let design = with_intercept(x);
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();

    let mut model: Vec<usize> = Vec::new();
    let (mut rss, mut rank) = rss_of(&design, y, &model)?;
    let mut removed_last: Option<usize> = None;

    for _ in 0..(4 * x.cols() + 4) {
        if rss <= 1e-24 * tss.max(f64::MIN_POSITIVE) || model.len() + 2 >= n {
            break;
        }
        let mut best: Option<(usize, f64, f64, usize)> = None;
        for j in 0..x.cols() {
            if model.contains(&j) || removed_last == Some(j) {
                continue;
            }
            let mut trial = model.clone();
            trial.push(j);
            let (r, k) = rss_of(&design, y, &trial)?;
            let pv = partial_f_pvalue(rss, r, rank, k, n);
            if best.map_or(true, |(_, bp, _, _)| pv < bp) {
                best = Some((j, pv, r, k));
            }
        }
        let Some((j, pv, r, k)) = best else { break };
        if pv >= alpha {
            break;
        }
        model.push(j);
        rss = r;
        rank = k;
        removed_last = None;

        // Backward pass: drop the least significant variable while any is above alpha.
        loop {
            if model.len() < 2 {
                break;
            }
            let mut worst: Option<(usize, f64, f64, usize)> = None;
            for (pos, _) in model.iter().enumerate() {
                let mut reduced = model.clone();
                reduced.remove(pos);
                let (r_red, k_red) = rss_of(&design, y, &reduced)?;
                let pv = partial_f_pvalue(r_red, rss, k_red, rank, n);
                if worst.map_or(true, |(_, wp, _, _)| pv > wp) {
                    worst = Some((pos, pv, r_red, k_red));
                }
            }
            match worst {
                Some((pos, pv, r_red, k_red)) if pv > alpha => {
                    removed_last = Some(model.remove(pos));
                    rss = r_red;
                    rank = k_red;
                }
                _ => break,
            }
        }
    }
    model.sort_unstable();
    Ok(model)
}
