//! Dense kernels: the column-major [`Matrix`], second-moment
//! standardization, coherence, column-subset least squares and the
//! Student/Fisher distribution functions used for inference.
//!
//! Normalization divides each column by the square root of its
//! *uncentered* second moment `n⁻¹ Σᵢ xᵢ²`, not by its standard deviation.
//! A column with a large mean therefore keeps that mean after scaling.

mod dist;
mod qr;

pub use dist::{f_cdf, f_sf, ln_gamma, regularized_beta, student_cdf, student_quantile, student_sf};
pub use qr::{ols_subset, InferenceStatus, LsFit, PivotedQr, Projector, DEFAULT_RANK_TOL};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense matrix stored column by column: entry `(i, j)` lives at
/// `data[j * rows + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Wraps column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[j * rows + i] = data[i * cols + j];
            }
        }
        Ok(m)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} rows, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &j in cols {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for j in 0..self.cols {
            let c = self.col(j);
            data.extend(rows.iter().map(|&i| c[i]));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Appends the columns of `other` on the right.
    pub fn hcat(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hcat of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec length");
        let mut out = vec![0.0; self.rows];
        for (j, &b) in v.iter().enumerate() {
            if b != 0.0 {
                for (o, x) in out.iter_mut().zip(self.col(j)) {
                    *o += b * x;
                }
            }
        }
        out
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "tr_mul_vec length");
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Columns scaled to unit empirical second moment.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    /// Normalized design `X D`; dropped columns are left as zeros.
    pub xt: Matrix,
    /// `σ_ℓ = sqrt(n⁻¹ Σᵢ X²ᵢℓ)` for every original column.
    pub scales: Vec<f64>,
    /// Columns whose scale fell below `tol · max σ`.
    pub dropped: Vec<usize>,
    /// Ascending list of the columns that survived.
    pub retained: Vec<usize>,
    /// Max off-diagonal |n⁻¹ X̃ᵀX̃| over retained columns; 0 with fewer than two.
    pub coherence: f64,
}

impl StandardizedDesign {
    pub fn n(&self) -> usize {
        self.xt.rows()
    }

    pub fn p(&self) -> usize {
        self.xt.cols()
    }

    pub fn is_retained(&self, j: usize) -> bool {
        self.retained.binary_search(&j).is_ok()
    }
}

pub const DEFAULT_STANDARDIZE_TOL: f64 = 1e-12;

pub fn standardize(x: &Matrix, tol: f64) -> Result<StandardizedDesign> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::DimensionMismatch("empty design".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("design matrix"));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("standardize tolerance {tol} must be > 0")));
    }
    let n = x.rows() as f64;
    let scales: Vec<f64> = (0..x.cols())
        .map(|j| (dot(x.col(j), x.col(j)) / n).sqrt())
        .collect();
    let max_scale = scales.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * max_scale;

    let mut xt = Matrix::zeros(x.rows(), x.cols());
    let mut dropped = Vec::new();
    let mut retained = Vec::new();
    for (j, &s) in scales.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            dropped.push(j);
            continue;
        }
        retained.push(j);
        for (o, v) in xt.col_mut(j).iter_mut().zip(x.col(j)) {
            *o = v / s;
        }
    }
    if retained.is_empty() {
        return Err(Error::NoUsablePredictors);
    }
    let coherence = if retained.len() >= 2 {
        max_abs_gram_offdiag(&xt, &retained)
    } else {
        0.0
    };
    Ok(StandardizedDesign {
        xt,
        scales,
        dropped,
        retained,
        coherence,
    })
}

/// Coherence of an already standardized design.
pub fn coherence(sd: &StandardizedDesign) -> Result<f64> {
    if sd.retained.len() < 2 {
        return Err(Error::TooFewColumns(sd.retained.len()));
    }
    Ok(sd.coherence)
}

const GRAM_BLOCK: usize = 256;

/// Blocked `n⁻¹ X_Bᵀ X` products, keeping only the running max of the
/// strict upper triangle.
fn max_abs_gram_offdiag(xt: &Matrix, retained: &[usize]) -> f64 {
    let packed = xt.select_cols(retained);
    let n = packed.rows();
    let k = packed.cols();
    let a = packed.as_col_major();
    let blocks: Vec<usize> = (0..k).step_by(GRAM_BLOCK).collect();
    let max = blocks
        .par_iter()
        .map(|&start| {
            let len = GRAM_BLOCK.min(k - start);
            // Columns start..start+len against columns start..k.
            let rest = k - start;
            let mut g = vec![0.0; len * rest];
            // SAFETY: pointers and strides describe the column-major buffers
            // allocated above; dimensions are in bounds.
            unsafe {
                matrixmultiply::dgemm(
                    len,
                    n,
                    rest,
                    1.0 / n as f64,
                    a.as_ptr().add(start * n),
                    n as isize,
                    1,
                    a.as_ptr().add(start * n),
                    1,
                    n as isize,
                    0.0,
                    g.as_mut_ptr(),
                    rest as isize,
                    1,
                );
            }
            let mut m = 0.0f64;
            for r in 0..len {
                for c in (r + 1)..rest {
                    m = m.max(g[r * rest + c].abs());
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    max.min(1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_coherence(sd: &StandardizedDesign) -> f64 {
        let n = sd.n() as f64;
        let mut m = 0.0f64;
        for (a, &i) in sd.retained.iter().enumerate() {
            for &j in &sd.retained[a + 1..] {
                m = m.max((dot(sd.xt.col(i), sd.xt.col(j)) / n).abs());
            }
        }
        m
    }

    #[test]
    fn unit_column_is_unchanged() {
        let x = Matrix::from_columns(&[vec![1.0; 4], vec![1.0, -1.0, 1.0, -1.0]]).unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        assert_eq!(sd.scales[0], 1.0);
        assert_eq!(sd.xt.col(0), &[1.0; 4]);
        assert_eq!(coherence(&sd).unwrap(), 0.0);
    }

    #[test]
    fn constant_scaling() {
        let x = Matrix::from_columns(&[vec![2.0, 2.0]]).unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        assert_eq!(sd.scales[0], 2.0);
        assert_eq!(sd.xt.col(0), &[1.0, 1.0]);
    }

    #[test]
    fn three_four_column() {
        let x = Matrix::from_columns(&[vec![3.0, 4.0]]).unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        let sigma = (12.5f64).sqrt();
        assert!((sd.scales[0] - 3.53553).abs() < 1e-5);
        assert!((sd.xt.get(0, 0) - 3.0 / sigma).abs() < 1e-15);
        assert!((sd.xt.get(0, 0) - 0.84853).abs() < 1e-5);
        assert!((sd.xt.get(1, 0) - 1.13137).abs() < 1e-5);
    }

    #[test]
    fn degenerate_columns_are_dropped() {
        let x = Matrix::from_columns(&[vec![0.0; 3], vec![1.0, 2.0, 3.0], vec![1e-20, 0.0, 0.0]])
            .unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        assert_eq!(sd.dropped, vec![0, 2]);
        assert_eq!(sd.retained, vec![1]);
        assert!(coherence(&sd).is_err());
    }

    #[test]
    fn all_degenerate_is_an_error() {
        let x = Matrix::zeros(5, 3);
        assert_eq!(standardize(&x, 1e-12).unwrap_err(), Error::NoUsablePredictors);
    }

    #[test]
    fn identical_columns_have_unit_coherence() {
        let c = vec![0.3, -1.2, 2.5, 0.7];
        let x = Matrix::from_columns(&[c.clone(), c]).unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        assert!((coherence(&sd).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blocked_gram_matches_brute_force() {
        // Deterministic pseudo-random fill wide enough to cross the block size.
        let (n, p) = (17, 600);
        let mut state = 12345u64;
        let data: Vec<f64> = (0..n * p)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        let x = Matrix::from_col_major(n, p, data).unwrap();
        let sd = standardize(&x, 1e-12).unwrap();
        assert!((sd.coherence - brute_coherence(&sd)).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite() {
        let x = Matrix::from_columns(&[vec![1.0, f64::NAN]]).unwrap();
        assert_eq!(standardize(&x, 1e-12).unwrap_err(), Error::NonFinite("design matrix"));
    }
}
