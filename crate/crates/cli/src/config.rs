//! Run configurations and the named presets.
//!
//! A [`RunConfig`] fully determines a run apart from the output directory
//! and the worker count, and round-trips through JSON unchanged, so the
//! `config` object embedded in a report can be replayed with `lola run`.

use std::path::PathBuf;

use lola::ivpipe::{IvMode, IvParams};
use lola::simgen::{DictionarySpec, EndogenousSpec, SchauderProfile, SimScenario};
use lola::SelectorParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Select(SelectConfig),
    Iv(IvConfig),
    Dict(DictConfig),
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        match self {
            RunConfig::Simulate(c) => c.seed(),
            RunConfig::Select(c) => c.seed,
            RunConfig::Iv(c) => c.params.seed,
            RunConfig::Dict(c) => c.spec.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub experiment: Experiment,
    pub reps: usize,
    pub selector: String,
    pub selector_params: SelectorParams,
}

impl SimulateConfig {
    pub fn seed(&self) -> u64 {
        match &self.experiment {
            Experiment::Sparse { scenario } => scenario.seed,
            Experiment::Housing(h) => h.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    /// Gaussian design with a sparse coefficient vector. Replication `k`
    /// uses seed `scenario.seed + k`.
    Sparse { scenario: SimScenario },
    /// Housing-style base embedded among artificial columns.
    Housing(HousingConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HousingConfig {
    pub n: usize,
    pub per_dist: usize,
    pub fraction: f64,
    /// Also run the Student and stepwise baselines on the base columns.
    pub baselines: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub data: PathBuf,
    pub target: String,
    /// Predictor columns; every other column when absent.
    pub predictors: Option<Vec<String>>,
    /// Artificial columns per law.
    pub augment: Option<usize>,
    /// Row fraction for repeated runs; all rows when absent.
    pub subsample: Option<f64>,
    pub reps: usize,
    pub seed: u64,
    pub selector: String,
    pub selector_params: SelectorParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IvData {
    Csv {
        path: PathBuf,
        y: String,
        x: String,
        /// Instrument columns; every other column when absent.
        instruments: Option<Vec<String>>,
    },
    Synthetic(EndogenousSpec),
}

/// Dictionary sizes; the grid size is the number of usable rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DictSizes {
    pub n_cos: usize,
    pub n_sin: usize,
    pub n_box: usize,
    pub j_max: u32,
    pub seed: u64,
    #[serde(default)]
    pub profile: SchauderProfile,
}

impl DictSizes {
    pub fn spec(&self, n: usize) -> DictionarySpec {
        DictionarySpec {
            n,
            n_cos: self.n_cos,
            n_sin: self.n_sin,
            n_box: self.n_box,
            j_max: self.j_max,
            seed: self.seed,
            profile: self.profile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvConfig {
    pub data: IvData,
    pub dictionary: Option<DictSizes>,
    pub params: IvParams,
    pub selector: String,
    pub selector_params: SelectorParams,
    /// Also fit `Y = α₁ + α₂X` without instruments on the same subsamples.
    pub baseline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DictConfig {
    pub spec: DictionarySpec,
}

pub const PRESETS: [&str; 5] = ["exp1", "exp2", "exp3", "boston-style", "iv-demo"];

/// The preset `name` with the given seed.
pub fn preset(name: &str, seed: u64) -> CliResult<RunConfig> {
    let sparse = |scenario: SimScenario| {
        RunConfig::Simulate(SimulateConfig {
            experiment: Experiment::Sparse { scenario },
            reps: 100,
            selector: "lola".into(),
            selector_params: SelectorParams::default(),
        })
    };
    Ok(match name {
        "exp1" => sparse(SimScenario::exp1(seed)),
        "exp2" => sparse(SimScenario::exp2(seed)),
        "exp3" => sparse(SimScenario::exp3(seed)),
        "boston-style" => RunConfig::Simulate(SimulateConfig {
            experiment: Experiment::Housing(HousingConfig {
                n: 506,
                per_dist: 300,
                fraction: 0.75,
                baselines: true,
                seed,
            }),
            reps: 100,
            selector: "lola".into(),
            selector_params: SelectorParams::default(),
        }),
        "iv-demo" => RunConfig::Iv(IvConfig {
            data: IvData::Synthetic(EndogenousSpec::new(-0.2, seed)),
            dictionary: None,
            params: IvParams {
                mode: IvMode::Model1,
                reps: 200,
                seed,
                ..IvParams::default()
            },
            selector: "lola".into(),
            selector_params: SelectorParams::default(),
            baseline: true,
        }),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let c = preset(name, 17).unwrap();
            assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c, "{name}");
            assert_eq!(c.seed(), 17);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("exp9", 0), Err(CliError::Config(_))));
    }

    #[test]
    fn awkward_floats_round_trip() {
        let mut c = preset("exp1", 1).unwrap();
        if let RunConfig::Simulate(s) = &mut c {
            if let Experiment::Sparse { scenario } = &mut s.experiment {
                scenario.snr = 0.1 + 0.2;
                scenario.beta_magnitude = 1.0 / 3.0;
            }
            s.selector_params.t = Some(std::f64::consts::PI * 1e-7);
        }
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
