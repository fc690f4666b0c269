use std::ops::Range;

use rand::Rng;
use rand_distr::{Bernoulli, Cauchy, Distribution, Exp, LogNormal, StandardNormal, StudentT};
use serde::Serialize;

use super::stream_rng;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Laws of the artificial columns, in the order they are appended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtificialLaw {
    Normal,
    LogNormal,
    Bernoulli,
    Uniform,
    Exponential,
    StudentT2,
    Cauchy,
}

impl ArtificialLaw {
    pub const ALL: [ArtificialLaw; 7] = [
        ArtificialLaw::Normal,
        ArtificialLaw::LogNormal,
        ArtificialLaw::Bernoulli,
        ArtificialLaw::Uniform,
        ArtificialLaw::Exponential,
        ArtificialLaw::StudentT2,
        ArtificialLaw::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArtificialLaw::Normal => "normal",
            ArtificialLaw::LogNormal => "lognormal",
            ArtificialLaw::Bernoulli => "bernoulli",
            ArtificialLaw::Uniform => "uniform",
            ArtificialLaw::Exponential => "exponential",
            ArtificialLaw::StudentT2 => "student_t2",
            ArtificialLaw::Cauchy => "cauchy",
        }
    }

    pub fn is_heavy_tailed(self) -> bool {
        matches!(self, ArtificialLaw::StudentT2 | ArtificialLaw::Cauchy)
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            ArtificialLaw::Normal => rng.sample(StandardNormal),
            ArtificialLaw::LogNormal => LogNormal::new(0.0, 1.0).expect("valid").sample(rng),
            ArtificialLaw::Bernoulli => {
                if Bernoulli::new(0.5).expect("valid").sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            ArtificialLaw::Uniform => rng.random::<f64>(),
            ArtificialLaw::Exponential => Exp::new(1.0).expect("valid").sample(rng),
            ArtificialLaw::StudentT2 => StudentT::new(2.0).expect("valid").sample(rng),
            ArtificialLaw::Cauchy => Cauchy::new(0.0, 1.0).expect("valid").sample(rng),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LawBlock {
    pub law: ArtificialLaw,
    pub columns: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct Augmented {
    pub x: Matrix,
    pub base_cols: usize,
    pub blocks: Vec<LawBlock>,
}

impl Augmented {
    /// Law of column `j`, `None` for base columns.
    pub fn law_of(&self, j: usize) -> Option<ArtificialLaw> {
        self.blocks
            .iter()
            .find(|b| b.columns.contains(&j))
            .map(|b| b.law)
    }
}

const AUGMENT_STREAM: u64 = 7;

/// Appends `per_dist` independent columns of each of the seven laws to
/// `x0`, leaving the base columns untouched.
pub fn augment_artificial(x0: &Matrix, per_dist: usize, seed: u64) -> Result<Augmented> {
    if per_dist == 0 {
        return Err(Error::InvalidScenario("per_dist must be >= 1".into()));
    }
    let n = x0.rows();
    let mut rng = stream_rng(seed, AUGMENT_STREAM);
    let extra_cols = ArtificialLaw::ALL.len() * per_dist;
    let mut extra = Matrix::zeros(n, extra_cols);
    let mut blocks = Vec::with_capacity(ArtificialLaw::ALL.len());
    for (b, law) in ArtificialLaw::ALL.into_iter().enumerate() {
        let start = b * per_dist;
        for j in start..start + per_dist {
            for v in extra.col_mut(j) {
                *v = law.draw(&mut rng);
            }
        }
        blocks.push(LawBlock {
            law,
            columns: (x0.cols() + start)..(x0.cols() + start + per_dist),
        });
    }
    Ok(Augmented {
        x: x0.hcat(&extra)?,
        base_cols: x0.cols(),
        blocks,
    })
}

const BASE_STREAM: u64 = 8;

/// Coefficients of the synthetic housing-style base. Two columns carry no
/// signal, matching the handful of weak predictors in the usual data.
pub const HOUSING_BETA: [f64; 13] = [
    -1.0, 1.0, 0.0, 0.7, -2.0, 3.0, 0.0, -3.0, 2.5, -1.8, -2.0, 0.9, -3.7,
];

#[derive(Debug, Clone)]
pub struct HousingBase {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Thirteen mean-zero Gaussian predictors sharing a common factor
/// (pairwise correlation 0.3) and a centered response with R² near 0.75.
pub fn housing_style_base(n: usize, seed: u64) -> Result<HousingBase> {
    if n < 20 {
        return Err(Error::InvalidScenario("housing base needs n >= 20".into()));
    }
    let mut rng = stream_rng(seed, BASE_STREAM);
    let p = HOUSING_BETA.len();
    let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let (a, b) = (0.3f64.sqrt(), 0.7f64.sqrt());
    let mut x = Matrix::zeros(n, p);
    for j in 0..p {
        for (v, f) in x.col_mut(j).iter_mut().zip(&common) {
            let e: f64 = rng.sample(StandardNormal);
            *v = a * f + b * e;
        }
        let col = x.col_mut(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        col.iter_mut().for_each(|v| *v -= mean);
    }
    let signal = x.mul_vec(&HOUSING_BETA);
    let sd = super::empirical_sd(&signal);
    // Noise variance a third of the signal variance gives R² ≈ 0.75.
    let eta = sd / 3f64.sqrt();
    let mut y: Vec<f64> = signal
        .iter()
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            s + eta * e
        })
        .collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    y.iter_mut().for_each(|v| *v -= mean);
    Ok(HousingBase {
        x,
        y,
        beta: HOUSING_BETA.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_counts() {
        let x0 = Matrix::zeros(10, 13);
        let a = augment_artificial(&x0, 300, 1).unwrap();
        assert_eq!(a.x.cols(), 2113);
        let a = augment_artificial(&x0, 1, 1).unwrap();
        assert_eq!(a.x.cols(), 20);
        assert_eq!(a.law_of(13), Some(ArtificialLaw::Normal));
        assert_eq!(a.law_of(19), Some(ArtificialLaw::Cauchy));
        assert_eq!(a.law_of(12), None);
    }

    #[test]
    fn base_prefix_is_untouched() {
        let x0 = Matrix::from_columns(&[vec![1.5, -2.0, 3.25], vec![0.0, 1.0, 2.0]]).unwrap();
        let a = augment_artificial(&x0, 4, 11).unwrap();
        assert_eq!(a.x.col(0), x0.col(0));
        assert_eq!(a.x.col(1), x0.col(1));
    }

    #[test]
    fn supports_match_the_laws() {
        let x0 = Matrix::zeros(200, 1);
        let a = augment_artificial(&x0, 3, 5).unwrap();
        for b in &a.blocks {
            for j in b.columns.clone() {
                let c = a.x.col(j);
                match b.law {
                    ArtificialLaw::Bernoulli => assert!(c.iter().all(|&v| v == 0.0 || v == 1.0)),
                    ArtificialLaw::Uniform => assert!(c.iter().all(|&v| (0.0..1.0).contains(&v))),
                    ArtificialLaw::LogNormal | ArtificialLaw::Exponential => {
                        assert!(c.iter().all(|&v| v > 0.0))
                    }
                    _ => assert!(c.iter().all(|v| v.is_finite())),
                }
            }
        }
    }

    #[test]
    fn housing_base_is_centered() {
        let b = housing_style_base(506, 1).unwrap();
        assert_eq!(b.x.cols(), 13);
        assert!(b.y.iter().sum::<f64>().abs() < 1e-9);
        for j in 0..13 {
            assert!(b.x.col(j).iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn heavy_tails() {
        assert!(ArtificialLaw::Cauchy.is_heavy_tailed());
        assert!(ArtificialLaw::StudentT2.is_heavy_tailed());
        assert!(!ArtificialLaw::LogNormal.is_heavy_tailed());
    }
}
