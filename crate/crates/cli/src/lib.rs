//! Command-line front end: configuration, CSV input and report bundles.
//!
//! Every run writes `report.json`, `tables/*.csv`, `plotdata/*.csv` and
//! `log.txt` to its output directory. The report embeds the exact
//! [`config::RunConfig`], so `lola run report.json` repeats the run.

pub mod args;
pub mod bundle;
pub mod config;
pub mod data;
pub mod dict;
pub mod error;
pub mod iv;
pub mod select;
pub mod simulate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use lola::SelectorRegistry;

use crate::args::{Cli, Command};
use crate::bundle::ReportBundle;
use crate::config::{RunConfig, PRESETS};
use crate::error::{CliError, CliResult};

/// Runs `cfg` and writes the bundle to `out`.
pub fn execute(cfg: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let mut bundle = ReportBundle::create(out)?;
    bundle.log(format!("lola {} seed {}", lola::VERSION, cfg.seed()));
    match cfg {
        RunConfig::Simulate(c) => simulate::run(c, cfg, &mut bundle)?,
        RunConfig::Select(c) => select::run(c, cfg, &mut bundle)?,
        RunConfig::Iv(c) => iv::run(c, cfg, &mut bundle)?,
        RunConfig::Dict(c) => dict::run(c, cfg, &mut bundle)?,
    }
    bundle.finish()
}

/// Reads a run configuration, or the `config` member of a report.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = match value.get("config") {
        Some(c) if value.get("subcommand").is_none() => c.clone(),
        _ => value,
    };
    serde_json::from_value(cfg).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Sizes the global worker pool from `LOLA_THREADS`.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("LOLA_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("LOLA_THREADS=`{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let seeded = |s: Option<u64>| {
        let (seed, random) = args::resolve_seed(s);
        if random {
            eprintln!("seed {seed}");
        }
        seed
    };
    let cfg = match &cli.command {
        Command::Simulate(a) => args::simulate_config(a, seeded(a.seed))?,
        Command::Select(a) => args::select_config(a, seeded(a.seed)),
        Command::Iv(a) => args::iv_config(a, seeded(a.seed))?,
        Command::Dict(a) => args::dict_config(a, seeded(a.seed))?,
        Command::Run { config } => load_config(config)?,
        Command::List => {
            println!("presets: {}", PRESETS.join(", "));
            println!("selectors:");
            for (name, desc) in SelectorRegistry::with_builtins().describe() {
                println!("  {name:<10} {desc}");
            }
            return Ok(());
        }
    };
    if cli.dry_run {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let dir = execute(&cfg, &cli.out)?;
    println!("wrote {}", dir.display());
    Ok(())
}

/// Parses `argv`, runs it and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match init_threads().and_then(|_| dispatch(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
