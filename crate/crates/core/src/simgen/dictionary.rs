//! Cosine, sine, box and Schauder functions sampled on the grid `i/n`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const DICT_STREAM: u64 = 11;
const BOX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub n: usize,
    pub n_cos: usize,
    pub n_sin: usize,
    pub n_box: usize,
    /// Finest Schauder level.
    pub j_max: u32,
    /// Seeds the box endpoints.
    pub seed: u64,
    #[serde(default)]
    pub profile: SchauderProfile,
}

/// Shape of the Schauder mother function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchauderProfile {
    /// Continuous tent, `u` then `1 − u`.
    #[default]
    Tent,
    /// `u·1[0,½](u) − (u·1[½,1](u) − 1[½,1](u))` with closed indicators,
    /// which double counts `u = ½`.
    Literal,
}

impl SchauderProfile {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            SchauderProfile::Tent => schauder_profile(u),
            SchauderProfile::Literal => {
                let lo = if (0.0..=0.5).contains(&u) { 1.0 } else { 0.0 };
                let hi = if (0.5..=1.0).contains(&u) { 1.0 } else { 0.0 };
                u * lo - (u * hi - hi)
            }
        }
    }
}

impl DictionarySpec {
    /// Sized for roughly one hundred countries.
    pub fn growth_default(n: usize, seed: u64) -> Self {
        Self {
            n,
            n_cos: 100.min(n),
            n_sin: 100.min(n),
            n_box: 60,
            j_max: 5.min(max_level(n)),
            seed,
            profile: SchauderProfile::Tent,
        }
    }

    pub fn schauder_cols(&self) -> usize {
        (0..=self.j_max).map(|j| (1usize << j) - 1).sum()
    }

    pub fn total_cols(&self) -> usize {
        self.n_cos + self.n_sin + self.n_box + self.schauder_cols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidScenario("dictionary grid is empty".into()));
        }
        if self.n_cos > self.n || self.n_sin > self.n {
            return Err(Error::InvalidScenario(format!(
                "frequencies must not exceed n = {}",
                self.n
            )));
        }
        if self.j_max > max_level(self.n) {
            return Err(Error::InvalidScenario(format!(
                "j_max {} exceeds log2(n) = {}",
                self.j_max,
                max_level(self.n)
            )));
        }
        if self.total_cols() == 0 {
            return Err(Error::EmptyDictionary);
        }
        Ok(())
    }
}

fn max_level(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DictLabel {
    Cos { lambda: usize },
    Sin { lambda: usize },
    Box { lambda: usize, a: f64, b: f64 },
    Schauder { j: u32, k: usize },
}

impl fmt::Display for DictLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DictLabel::Cos { lambda } => write!(f, "cos_{lambda}"),
            DictLabel::Sin { lambda } => write!(f, "sin_{lambda}"),
            DictLabel::Box { lambda, a, b } => write!(f, "box_{lambda}[{a:.4},{b:.4}]"),
            DictLabel::Schauder { j, k } => write!(f, "schauder_{j}_{k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    pub z: Matrix,
    pub labels: Vec<DictLabel>,
}

/// Tent on `[0, 1]` peaking at `1/2`.
pub fn schauder_profile(u: f64) -> f64 {
    if (0.0..0.5).contains(&u) {
        u
    } else if (0.5..=1.0).contains(&u) {
        1.0 - u
    } else {
        0.0
    }
}

/// `2πλi/n` reduced modulo the period in integer arithmetic, so `λ = n`
/// gives an exactly constant cosine.
fn phase(lambda: usize, i: usize, n: usize) -> f64 {
    let r = (lambda as u128 * i as u128 % n as u128) as f64;
    2.0 * PI * r / n as f64
}

pub fn dictionary_design(spec: &DictionarySpec) -> Result<Dictionary> {
    spec.validate()?;
    let n = spec.n;
    let grid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(spec.total_cols());
    let mut labels = Vec::with_capacity(spec.total_cols());

    for lambda in 1..=spec.n_cos {
        cols.push((1..=n).map(|i| phase(lambda, i, n).cos()).collect());
        labels.push(DictLabel::Cos { lambda });
    }
    for lambda in 1..=spec.n_sin {
        cols.push((1..=n).map(|i| phase(lambda, i, n).sin()).collect());
        labels.push(DictLabel::Sin { lambda });
    }

    let mut rng = stream_rng(spec.seed, DICT_STREAM);
    for lambda in 1..=spec.n_box {
        let mut found = None;
        for _ in 0..BOX_ATTEMPTS {
            // 1 − U[0,1) lies in (0, 1].
            let u: f64 = 1.0 - rng.random::<f64>();
            let v: f64 = 1.0 - rng.random::<f64>();
            let (a, b) = if u <= v { (u, v) } else { (v, u) };
            let col: Vec<f64> = grid
                .iter()
                .map(|&x| if a <= x && x <= b { 1.0 } else { 0.0 })
                .collect();
            if col.iter().any(|&v| v != 0.0) {
                found = Some((a, b, col));
                break;
            }
        }
        let (a, b, col) = found.ok_or(Error::EmptyBox(lambda))?;
        cols.push(col);
        labels.push(DictLabel::Box { lambda, a, b });
    }

    for j in 0..=spec.j_max {
        let scale = 2f64.powi(j as i32);
        let amp = scale.sqrt();
        for k in 1..(1usize << j) {
            cols.push(
                grid.iter()
                    .map(|&x| amp * spec.profile.eval(scale * x - k as f64))
                    .collect(),
            );
            labels.push(DictLabel::Schauder { j, k });
        }
    }

    Ok(Dictionary {
        z: Matrix::from_columns(&cols)?,
        labels,
    })
}
