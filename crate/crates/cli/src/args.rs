//! Command-line flags and their translation into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lola::ivpipe::IvMode;
use lola::simgen::{DesignKind, DictionarySpec, EndogenousSpec, SchauderProfile, SnrConvention};
use lola::{BoundaryRule, CapMode, SelectorParams};

use crate::config::{preset, DictConfig, DictSizes, Experiment, IvData, RunConfig, SelectConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "lola", version, about = "Two-step variable selection for sparse linear regression")]
pub struct Cli {
    /// Output directory for report.json, tables/, plotdata/ and log.txt.
    #[arg(long, global = true, default_value = "lola-out")]
    pub out: PathBuf,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo study on simulated data.
    Simulate(SimulateArgs),
    /// Variable selection on a CSV file.
    Select(SelectArgs),
    /// Instrument selection and control-variable estimation.
    Iv(IvArgs),
    /// Write a function dictionary on the grid i/n.
    Dict(DictArgs),
    /// Replay a configuration file, or the `config` object of a report.json.
    Run { config: PathBuf },
    /// List presets and selectors.
    List,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CapArg {
    Theory,
    Adaptive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Model1,
    Model2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Tent,
    Literal,
}

impl From<ProfileArg> for SchauderProfile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Tent => SchauderProfile::Tent,
            ProfileArg::Literal => SchauderProfile::Literal,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SelectorArgs {
    /// Selection strategy (see `lola list`).
    #[arg(long)]
    pub selector: Option<String>,
    /// Upper bound on the leader count.
    #[arg(long)]
    pub max_leaders: Option<usize>,
    #[arg(long, value_enum)]
    pub cap_mode: Option<CapArg>,
    /// Manual screening threshold; switches to the `lol` selector.
    #[arg(long, requires = "threshold_s")]
    pub threshold_t: Option<f64>,
    /// Manual coefficient threshold; switches to the `lol` selector.
    #[arg(long, requires = "threshold_t")]
    pub threshold_s: Option<f64>,
    /// Confidence level of the baseline selectors.
    #[arg(long)]
    pub level: Option<f64>,
    /// Keep values equal to the split boundary.
    #[arg(long)]
    pub inclusive_boundary: bool,
}

impl SelectorArgs {
    /// Applies the flags on top of `name` and `params`.
    pub fn apply(&self, name: &mut String, params: &mut SelectorParams) {
        if let Some(s) = &self.selector {
            *name = s.clone();
        }
        if let Some(m) = self.max_leaders {
            params.lola.max_leaders = Some(m);
        }
        if let Some(c) = self.cap_mode {
            params.lola.cap_mode = match c {
                CapArg::Theory => CapMode::Theory,
                CapArg::Adaptive => CapMode::Adaptive,
            };
        }
        if self.inclusive_boundary {
            params.lola.boundary = BoundaryRule::Inclusive;
        }
        if let Some(l) = self.level {
            params.level = l;
        }
        if let (Some(t), Some(s)) = (self.threshold_t, self.threshold_s) {
            params.t = Some(t);
            params.s = Some(s);
            if name == "lola" {
                *name = "lol".into();
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// exp1, exp2, exp3 or boston-style.
    #[arg(long, default_value = "exp1")]
    pub preset: String,
    /// Random when omitted; the value used is printed and recorded.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of nonzero coefficients.
    #[arg(long)]
    pub support: Option<usize>,
    /// Magnitude of the nonzero coefficients.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub snr: Option<f64>,
    /// Read the signal-to-noise ratio as a variance ratio.
    #[arg(long)]
    pub snr_var: bool,
    /// Equicorrelated design with this correlation.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Artificial columns per law (boston-style).
    #[arg(long)]
    pub per_dist: Option<usize>,
    /// Row fraction per replication (boston-style).
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Skip the Student and stepwise baselines (boston-style).
    #[arg(long)]
    pub no_baselines: bool,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Comma-separated predictor columns; every other column by default.
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<String>>,
    /// Append this many artificial columns of each law.
    #[arg(long)]
    pub augment: Option<usize>,
    /// Row fraction for repeated runs.
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DictFlags {
    #[arg(long, default_value_t = 100)]
    pub n_cos: usize,
    #[arg(long, default_value_t = 100)]
    pub n_sin: usize,
    #[arg(long, default_value_t = 60)]
    pub n_box: usize,
    #[arg(long, default_value_t = 5)]
    pub j_max: u32,
    #[arg(long, value_enum, default_value = "tent")]
    pub profile: ProfileArg,
}

#[derive(Debug, Clone, Args)]
pub struct IvArgs {
    /// Start from a preset (iv-demo).
    #[arg(long)]
    pub preset: Option<String>,
    /// CSV input; synthetic data when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "Y")]
    pub y: String,
    #[arg(long, default_value = "X")]
    pub x: String,
    /// Comma-separated instrument columns; every other column by default.
    #[arg(long, value_delimiter = ',')]
    pub instruments: Option<Vec<String>>,
    /// True coefficient of the synthetic data.
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Number of subsamples.
    #[arg(long)]
    pub k: Option<usize>,
    /// Row fraction per subsample.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long)]
    pub ci_level: Option<f64>,
    /// Replace the instruments by a function dictionary of X.
    #[arg(long)]
    pub dictionary: bool,
    #[command(flatten)]
    pub dict: DictFlags,
    /// Skip the fit without instruments.
    #[arg(long)]
    pub no_baseline: bool,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DictArgs {
    /// Grid size.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub dict: DictFlags,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// The seed to use and whether it was drawn at random.
pub fn resolve_seed(seed: Option<u64>) -> (u64, bool) {
    match seed {
        Some(s) => (s, false),
        None => (rand::random(), true),
    }
}

pub fn simulate_config(a: &SimulateArgs, seed: u64) -> CliResult<RunConfig> {
    if a.preset == "iv-demo" {
        return Err(CliError::Config("iv-demo is a preset of `lola iv`".into()));
    }
    let RunConfig::Simulate(mut c) = preset(&a.preset, seed)? else {
        unreachable!("simulation presets")
    };
    if let Some(r) = a.reps {
        c.reps = r;
    }
    match &mut c.experiment {
        Experiment::Sparse { scenario } => {
            let s = scenario;
            if let Some(v) = a.n {
                s.n = v;
            }
            if let Some(v) = a.p {
                s.p = v;
            }
            if let Some(v) = a.support {
                s.support_size = v;
            }
            if let Some(v) = a.beta {
                s.beta_magnitude = v;
            }
            if let Some(v) = a.snr {
                s.snr = v;
            }
            if a.snr_var {
                s.snr_convention = SnrConvention::Var;
            }
            if let Some(rho) = a.rho {
                s.design = DesignKind::Equicorrelated { rho };
            }
            s.validate()?;
        }
        Experiment::Housing(h) => {
            if let Some(v) = a.n {
                h.n = v;
            }
            if let Some(v) = a.per_dist {
                h.per_dist = v;
            }
            if let Some(v) = a.fraction {
                h.fraction = v;
            }
            if a.no_baselines {
                h.baselines = false;
            }
        }
    }
    a.selector.apply(&mut c.selector, &mut c.selector_params);
    Ok(RunConfig::Simulate(c))
}

pub fn select_config(a: &SelectArgs, seed: u64) -> RunConfig {
    let mut selector = "lola".to_string();
    let mut params = SelectorParams::default();
    a.selector.apply(&mut selector, &mut params);
    RunConfig::Select(SelectConfig {
        data: a.data.clone(),
        target: a.target.clone(),
        predictors: a.predictors.clone(),
        augment: a.augment,
        subsample: a.subsample,
        reps: a.reps,
        seed,
        selector,
        selector_params: params,
    })
}

fn dict_sizes(d: &DictFlags, seed: u64) -> DictSizes {
    DictSizes {
        n_cos: d.n_cos,
        n_sin: d.n_sin,
        n_box: d.n_box,
        j_max: d.j_max,
        seed,
        profile: d.profile.into(),
    }
}

pub fn iv_config(a: &IvArgs, seed: u64) -> CliResult<RunConfig> {
    let mut c = match &a.preset {
        Some(name) => match preset(name, seed)? {
            RunConfig::Iv(c) => c,
            _ => return Err(CliError::Config(format!("`{name}` is not a preset of `lola iv`"))),
        },
        None => {
            let RunConfig::Iv(c) = preset("iv-demo", seed)? else { unreachable!() };
            c
        }
    };
    if let Some(path) = &a.data {
        c.data = IvData::Csv {
            path: path.clone(),
            y: a.y.clone(),
            x: a.x.clone(),
            instruments: a.instruments.clone(),
        };
    } else if let Some(alpha2) = a.alpha2 {
        c.data = IvData::Synthetic(EndogenousSpec::new(alpha2, seed));
    }
    if let Some(m) = a.mode {
        c.params.mode = match m {
            ModeArg::Model1 => IvMode::Model1,
            ModeArg::Model2 => IvMode::Model2,
        };
    }
    if let Some(k) = a.k {
        c.params.reps = k;
    }
    if let Some(f) = a.fraction {
        c.params.fraction = f;
    }
    if let Some(l) = a.ci_level {
        c.params.ci_level = l;
    }
    if a.dictionary {
        c.dictionary = Some(dict_sizes(&a.dict, seed));
    }
    if a.no_baseline {
        c.baseline = false;
    }
    a.selector.apply(&mut c.selector, &mut c.selector_params);
    c.params.validate()?;
    Ok(RunConfig::Iv(c))
}

pub fn dict_config(a: &DictArgs, seed: u64) -> CliResult<RunConfig> {
    let spec: DictionarySpec = dict_sizes(&a.dict, seed).spec(a.n);
    spec.validate()?;
    Ok(RunConfig::Dict(DictConfig { spec }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("lola").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn manual_thresholds_switch_to_lol() {
        let cli = parse(&["simulate", "--threshold-t", "0.5", "--threshold-s", "0.2", "--seed", "3"]);
        let Command::Simulate(a) = cli.command else { panic!() };
        let RunConfig::Simulate(c) = simulate_config(&a, 3).unwrap() else { panic!() };
        assert_eq!(c.selector, "lol");
        assert_eq!(c.selector_params.t, Some(0.5));
    }

    #[test]
    fn one_threshold_is_a_usage_error() {
        assert!(Cli::try_parse_from(["lola", "simulate", "--threshold-t", "0.5"]).is_err());
    }

    #[test]
    fn iv_flags_override_preset() {
        let cli = parse(&["iv", "--k", "7", "--mode", "model2", "--dictionary", "--j-max", "3"]);
        let Command::Iv(a) = cli.command else { panic!() };
        let RunConfig::Iv(c) = iv_config(&a, 1).unwrap() else { panic!() };
        assert_eq!(c.params.reps, 7);
        assert_eq!(c.params.mode, IvMode::Model2);
        assert_eq!(c.dictionary.unwrap().j_max, 3);
    }

    #[test]
    fn simulate_rejects_iv_preset() {
        let cli = parse(&["simulate", "--preset", "iv-demo"]);
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!(simulate_config(&a, 0).unwrap_err().exit_code(), 2);
    }
}
