//! Seeded generators for the simulation studies.
//!
//! Every generator is a pure function of its configuration and seed. Each
//! scenario draws its design, coefficients and noise from separate ChaCha
//! streams of the same seed, so changing the noise level never perturbs
//! the design.

mod augment;
mod dictionary;
mod endogenous;

pub use augment::{augment_artificial, housing_style_base, ArtificialLaw, Augmented, HousingBase, LawBlock, HOUSING_BETA};
pub use dictionary::{dictionary_design, schauder_profile, DictLabel, Dictionary, DictionarySpec, SchauderProfile};
pub use endogenous::{gen_endogenous, EndogenousData, EndogenousSpec};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Noise levels at or above this SNR are treated as noiseless.
pub const NOISELESS_SNR: f64 = 1e12;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const DESIGN_STREAM: u64 = 1;
const BETA_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignKind {
    IidGaussian,
    /// Every pair of columns has correlation `rho`.
    Equicorrelated { rho: f64 },
}

/// How the signal-to-noise ratio maps to the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    /// `sd(signal) / η`.
    #[default]
    Sd,
    /// `var(signal) / η²`.
    Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub n: usize,
    pub p: usize,
    pub design: DesignKind,
    pub support_size: usize,
    pub beta_magnitude: f64,
    pub snr: f64,
    pub snr_convention: SnrConvention,
    pub seed: u64,
}

impl SimScenario {
    /// Independent Gaussian predictors, ten active coefficients of size 2.
    pub fn exp1(seed: u64) -> Self {
        Self {
            n: 400,
            p: 2000,
            design: DesignKind::IidGaussian,
            support_size: 10,
            beta_magnitude: 2.0,
            snr: 5.0,
            snr_convention: SnrConvention::Sd,
            seed,
        }
    }

    /// Exp1 with equicorrelated predictors.
    pub fn exp2(seed: u64) -> Self {
        Self {
            design: DesignKind::Equicorrelated { rho: 0.7 },
            ..Self::exp1(seed)
        }
    }

    /// Exp1 with fifty active coefficients.
    pub fn exp3(seed: u64) -> Self {
        Self {
            support_size: 50,
            ..Self::exp1(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidScenario("n and p must be positive".into()));
        }
        if self.support_size > self.p {
            return Err(Error::InvalidScenario(format!(
                "support size {} exceeds p = {}",
                self.support_size, self.p
            )));
        }
        if !(self.snr > 0.0) {
            return Err(Error::InvalidScenario(format!("snr {} must be > 0", self.snr)));
        }
        if !self.beta_magnitude.is_finite() {
            return Err(Error::InvalidScenario("beta magnitude must be finite".into()));
        }
        if let DesignKind::Equicorrelated { rho } = self.design {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidScenario(format!("rho {rho} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub beta: Vec<f64>,
    /// `{ℓ : β_ℓ ≠ 0}`, ascending.
    pub support: Vec<usize>,
    /// Noise standard deviation actually used.
    pub eta: f64,
}

pub fn gen_design(sc: &SimScenario) -> Result<Matrix> {
    sc.validate()?;
    let mut rng = stream_rng(sc.seed, DESIGN_STREAM);
    let (n, p) = (sc.n, sc.p);
    let mut x = Matrix::zeros(n, p);
    match sc.design {
        DesignKind::IidGaussian => {
            for j in 0..p {
                for v in x.col_mut(j) {
                    *v = rng.sample(StandardNormal);
                }
            }
        }
        DesignKind::Equicorrelated { rho } => {
            let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            for j in 0..p {
                for (v, f) in x.col_mut(j).iter_mut().zip(&common) {
                    let e: f64 = rng.sample(StandardNormal);
                    *v = a * f + b * e;
                }
            }
        }
    }
    Ok(x)
}

/// `S` positions drawn without replacement, each `±magnitude` with a fair
/// sign. `eta` is left at 0.
pub fn gen_sparse_beta(p: usize, support_size: usize, magnitude: f64, seed: u64) -> Result<GroundTruth> {
    if support_size > p {
        return Err(Error::InvalidScenario(format!("support size {support_size} exceeds p = {p}")));
    }
    let mut rng = stream_rng(seed, BETA_STREAM);
    let mut support = index::sample(&mut rng, p, support_size).into_vec();
    support.sort_unstable();
    let mut beta = vec![0.0; p];
    for &j in &support {
        beta[j] = if rng.random::<bool>() { magnitude } else { -magnitude };
    }
    if magnitude == 0.0 {
        support.clear();
    }
    Ok(GroundTruth { beta, support, eta: 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub y: Vec<f64>,
    pub eta: f64,
    /// The signal was identically zero, so `Y = 0`.
    pub degenerate: bool,
}

/// Population standard deviation.
pub fn empirical_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// `Y = Xβ + η ε` with `η` set from the empirical spread of the signal.
pub fn gen_response(x: &Matrix, beta: &[f64], snr: f64, convention: SnrConvention, seed: u64) -> Result<Response> {
    if beta.len() != x.cols() {
        return Err(Error::DimensionMismatch("beta length".into()));
    }
    if !(snr > 0.0) {
        return Err(Error::InvalidScenario(format!("snr {snr} must be > 0")));
    }
    let signal = x.mul_vec(beta);
    let sd = empirical_sd(&signal);
    if sd == 0.0 && signal.iter().all(|&v| v == 0.0) {
        return Ok(Response {
            y: signal,
            eta: 0.0,
            degenerate: true,
        });
    }
    let eta = if snr >= NOISELESS_SNR {
        0.0
    } else {
        match convention {
            SnrConvention::Sd => sd / snr,
            SnrConvention::Var => sd / snr.sqrt(),
        }
    };
    let mut rng = stream_rng(seed, NOISE_STREAM);
    let y = signal
        .into_iter()
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            s + eta * e
        })
        .collect();
    Ok(Response {
        y,
        eta,
        degenerate: false,
    })
}

#[derive(Debug, Clone)]
pub struct SimDraw {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub truth: GroundTruth,
    pub degenerate: bool,
}

/// Design, coefficients and response for one scenario.
pub fn simulate(sc: &SimScenario) -> Result<SimDraw> {
    let x = gen_design(sc)?;
    let mut truth = gen_sparse_beta(sc.p, sc.support_size, sc.beta_magnitude, sc.seed)?;
    let resp = gen_response(&x, &truth.beta, sc.snr, sc.snr_convention, sc.seed)?;
    truth.eta = resp.eta;
    Ok(SimDraw {
        x,
        y: resp.y,
        truth,
        degenerate: resp.degenerate,
    })
}
