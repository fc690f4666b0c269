//! Householder QR with column pivoting and least squares on column subsets.

use serde::Serialize;

use super::{dot, f_sf, Matrix};
use crate::error::{Error, Result};

/// Diagonal entries of `R` at or below `tol · |R₀₀|` count as rank-deficient.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Packed Householder factorization `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    /// `R` on and above the diagonal, reflector tails below it.
    packed: Vec<f64>,
    tau: Vec<f64>,
    /// `perm[k]` is the original column placed at position `k`.
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &Matrix, rank_tol: f64) -> Self {
        let (n, k) = (a.rows(), a.cols());
        let mut packed = a.as_col_major().to_vec();
        let mut perm: Vec<usize> = (0..k).collect();
        let steps = n.min(k);
        let mut tau = Vec::with_capacity(steps);
        let mut lead = 0.0f64;
        let mut rank = 0;

        for j in 0..steps {
            // Exact trailing norms; the first maximum wins ties.
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..k {
                let col = &packed[c * n + j..(c + 1) * n];
                let s = dot(col, col);
                if s > best_norm {
                    best_norm = s;
                    best = c;
                }
            }
            let best_norm = best_norm.sqrt();
            if j == 0 {
                lead = best_norm;
            }
            if best_norm == 0.0 || best_norm <= rank_tol * lead {
                break;
            }
            if best != j {
                for i in 0..n {
                    packed.swap(j * n + i, best * n + i);
                }
                perm.swap(j, best);
            }

            let x0 = packed[j * n + j];
            let beta = if x0 >= 0.0 { -best_norm } else { best_norm };
            let t = (beta - x0) / beta;
            let scale = 1.0 / (x0 - beta);
            for i in (j + 1)..n {
                packed[j * n + i] *= scale;
            }
            packed[j * n + j] = beta;
            tau.push(t);
            rank += 1;

            let (head, tail) = packed.split_at_mut((j + 1) * n);
            let v = &head[j * n + j + 1..(j + 1) * n];
            for c in 0..(k - j - 1) {
                let col = &mut tail[c * n + j..(c + 1) * n];
                let w = col[0] + dot(v, &col[1..]);
                let tw = t * w;
                col[0] -= tw;
                for (x, vi) in col[1..].iter_mut().zip(v) {
                    *x -= tw * vi;
                }
            }
        }

        Self {
            rows: n,
            cols: k,
            packed,
            tau,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `R[i, j]` in pivoted column order.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.packed[j * self.rows + i]
    }

    fn reflect(&self, j: usize, y: &mut [f64]) {
        let n = self.rows;
        let v = &self.packed[j * n + j + 1..(j + 1) * n];
        let w = y[j] + dot(v, &y[j + 1..]);
        let tw = self.tau[j] * w;
        y[j] -= tw;
        for (yi, vi) in y[j + 1..].iter_mut().zip(v) {
            *yi -= tw * vi;
        }
    }

    /// `y ← Qᵀ y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        for j in 0..self.tau.len() {
            self.reflect(j, y);
        }
    }

    /// `y ← Q y`.
    pub fn apply_q(&self, y: &mut [f64]) {
        for j in (0..self.tau.len()).rev() {
            self.reflect(j, y);
        }
    }

    /// Basic least-squares solution in the original column order; columns
    /// beyond the numerical rank get coefficient 0.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        let r = self.rank;
        let mut z = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = qty[i];
            for j in (i + 1)..r {
                s -= self.r(i, j) * z[j];
            }
            z[i] = s / self.r(i, i);
        }
        let mut coef = vec![0.0; self.cols];
        for (pos, &zi) in z.iter().enumerate() {
            coef[self.perm[pos]] = zi;
        }
        coef
    }

    /// Diagonal of `(R_rᵀ R_r)⁻¹`, in pivoted order.
    fn inverse_gram_diag(&self) -> Vec<f64> {
        let r = self.rank;
        // Column-by-column inverse of the leading upper-triangular block.
        let mut inv = vec![0.0; r * r];
        for j in 0..r {
            inv[j * r + j] = 1.0 / self.r(j, j);
            for i in (0..j).rev() {
                let mut s = 0.0;
                for m in (i + 1)..=j {
                    s += self.r(i, m) * inv[j * r + m];
                }
                inv[j * r + i] = -s / self.r(i, i);
            }
        }
        (0..r)
            .map(|i| (i..r).map(|j| inv[j * r + i] * inv[j * r + i]).sum())
            .collect()
    }
}

/// Orthogonal projection onto the complement of a column space.
#[derive(Debug, Clone)]
pub struct Projector {
    qr: PivotedQr,
}

impl Projector {
    pub fn new(controls: &Matrix) -> Self {
        Self {
            qr: PivotedQr::new(controls, DEFAULT_RANK_TOL),
        }
    }

    pub fn rank(&self) -> usize {
        self.qr.rank()
    }

    /// `v − P_C v`.
    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.qr.rows, "projector length");
        let mut y = v.to_vec();
        self.qr.apply_qt(&mut y);
        for yi in &mut y[..self.qr.rank] {
            *yi = 0.0;
        }
        self.qr.apply_q(&mut y);
        y
    }

    pub fn residual_matrix(&self, m: &Matrix) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..m.cols()).map(|j| self.residual(m.col(j))).collect();
        Matrix::from_columns(&cols).expect("rows preserved")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceStatus {
    Ok,
    /// `n − rank ≤ 0`: standard errors and F statistics are NaN.
    NoResidualDof,
}

#[derive(Debug, Clone)]
pub struct LsFit {
    /// Coefficients in the order of the requested columns.
    pub coeffs: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rank: usize,
    pub rss: f64,
    pub dof_resid: usize,
    /// NaN for pivoted-out columns or when there is no residual dof.
    pub stderrs: Vec<f64>,
    pub r2: f64,
    pub f_stat: f64,
    pub f_pvalue: f64,
    /// Whether a constant column is part of the fit (centered R² and F).
    pub has_intercept: bool,
    pub status: InferenceStatus,
}

impl LsFit {
    /// Two-sided t-test p-value for coefficient `j`.
    pub fn coef_pvalue(&self, j: usize) -> f64 {
        let t = self.coeffs[j] / self.stderrs[j];
        if t.is_nan() || self.dof_resid == 0 {
            return f64::NAN;
        }
        2.0 * super::student_sf(t.abs(), self.dof_resid as f64).unwrap_or(f64::NAN)
    }
}

fn is_constant(col: &[f64]) -> bool {
    let first = col[0];
    first != 0.0 && col.iter().all(|&v| v == first)
}

/// Least squares of `y` on the columns `cols` of `x`.
pub fn ols_subset(x: &Matrix, y: &[f64], cols: &[usize], rank_tol: f64) -> Result<LsFit> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if cols.is_empty() {
        return Err(Error::EmptySubset);
    }
    if cols.len() >= n {
        return Err(Error::UnderdeterminedSubset {
            cols: cols.len(),
            rows: n,
        });
    }
    if let Some(&bad) = cols.iter().find(|&&c| c >= x.cols()) {
        return Err(Error::DimensionMismatch(format!("column {bad} out of range")));
    }
    let sub = x.select_cols(cols);
    let qr = PivotedQr::new(&sub, rank_tol);
    let coeffs = qr.solve(y);
    let fitted = sub.mul_vec(&coeffs);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss = dot(&residuals, &residuals);
    let rank = qr.rank();
    let dof_resid = n - rank;

    let has_intercept = qr.perm()[..rank].iter().any(|&p| is_constant(sub.col(p)));
    let tss = if has_intercept {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
    } else {
        dot(y, y)
    };
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { f64::NAN };

    let status = if dof_resid == 0 {
        InferenceStatus::NoResidualDof
    } else {
        InferenceStatus::Ok
    };
    let mut stderrs = vec![f64::NAN; cols.len()];
    let (mut f_stat, mut f_pvalue) = (f64::NAN, f64::NAN);
    if status == InferenceStatus::Ok {
        let sigma2 = rss / dof_resid as f64;
        for (pos, v) in qr.inverse_gram_diag().into_iter().enumerate() {
            stderrs[qr.perm()[pos]] = (sigma2 * v).sqrt();
        }
        let df_model = rank - usize::from(has_intercept);
        if df_model > 0 {
            let explained = (tss - rss).max(0.0);
            f_stat = if rss > 0.0 {
                (explained / df_model as f64) / sigma2
            } else {
                f64::INFINITY
            };
            f_pvalue = f_sf(f_stat, df_model as f64, dof_resid as f64)?;
        }
    }

    Ok(LsFit {
        coeffs,
        fitted,
        residuals,
        rank,
        rss,
        dof_resid,
        stderrs,
        r2,
        f_stat,
        f_pvalue,
        has_intercept,
        status,
    })
}
