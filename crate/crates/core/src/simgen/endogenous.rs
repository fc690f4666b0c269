use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const ENDO_STREAM: u64 = 13;

/// `X = Zγ + v`, `Y = 1 + α₂X + Zδ + u`. The supports of `γ` and `δ`
/// overlap, so leaving the shared columns out of the control model biases
/// `α̂₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndogenousSpec {
    pub n: usize,
    pub p: usize,
    pub alpha2: f64,
    /// Columns `0..5` drive `X`.
    pub gamma: f64,
    /// Columns `2..7` drive `Y` directly.
    pub delta: f64,
    /// Standard deviation of `v`.
    pub x_noise_sd: f64,
    /// Standard deviation of `u`.
    pub y_noise_sd: f64,
    pub seed: u64,
}

impl EndogenousSpec {
    pub const GAMMA_SUPPORT: std::ops::Range<usize> = 0..5;
    pub const DELTA_SUPPORT: std::ops::Range<usize> = 2..7;

    pub fn new(alpha2: f64, seed: u64) -> Self {
        Self {
            n: 150,
            p: 200,
            alpha2,
            gamma: 1.0,
            delta: 0.5,
            x_noise_sd: 2.0,
            y_noise_sd: 1.0,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EndogenousData {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Matrix,
    pub spec: EndogenousSpec,
}

pub fn gen_endogenous(spec: &EndogenousSpec) -> Result<EndogenousData> {
    if spec.p < EndogenousSpec::DELTA_SUPPORT.end || spec.n < 10 {
        return Err(Error::InvalidScenario(format!(
            "endogenous benchmark needs p >= {} and n >= 10",
            EndogenousSpec::DELTA_SUPPORT.end
        )));
    }
    let (n, p) = (spec.n, spec.p);
    let mut rng = stream_rng(spec.seed, ENDO_STREAM);
    let mut z = Matrix::zeros(n, p);
    for j in 0..p {
        for v in z.col_mut(j) {
            *v = rng.sample(StandardNormal);
        }
    }
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let zg: f64 = EndogenousSpec::GAMMA_SUPPORT.map(|j| spec.gamma * z.get(i, j)).sum();
        let zd: f64 = EndogenousSpec::DELTA_SUPPORT.map(|j| spec.delta * z.get(i, j)).sum();
        let v: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.sample(StandardNormal);
        let xi = zg + spec.x_noise_sd * v;
        x.push(xi);
        y.push(1.0 + spec.alpha2 * xi + zd + spec.y_noise_sd * u);
    }
    Ok(EndogenousData { y, x, z, spec: *spec })
}
