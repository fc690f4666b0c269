//! Named selection strategies.
//!
//! Every selector implements [`Selector`]; a [`SelectorRegistry`] maps a
//! name to a factory so callers (the CLI, the instrument pipeline) can pick
//! a strategy at run time.
//!
//! ```
//! use lola::{SelectorParams, SelectorRegistry};
//!
//! let registry = SelectorRegistry::with_builtins();
//! let lola = registry.build("lola", &SelectorParams::default()).unwrap();
//! assert_eq!(lola.name(), "lola");
//! assert!(registry.build("lasso", &SelectorParams::default()).is_err());
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{baseline_stepwise, baseline_student, lol, lola, LolaOptions, SelectionReport};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone)]
pub struct SelectorOutput {
    pub selected: Vec<usize>,
    /// Full two-step report for the LOL family.
    pub report: Option<SelectionReport>,
}

pub trait Selector: Send + Sync {
    fn name(&self) -> &str;
    fn select(&self, x: &Matrix, y: &[f64]) -> Result<SelectorOutput>;
}

/// Union of the knobs the builtin selectors read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorParams {
    pub lola: LolaOptions,
    /// Manual screening threshold for `lol`.
    pub t: Option<f64>,
    /// Manual coefficient threshold for `lol`.
    pub s: Option<f64>,
    /// Confidence level for the baselines.
    pub level: f64,
}

impl Default for SelectorParams {
    fn default() -> Self {
        Self {
            lola: LolaOptions::default(),
            t: None,
            s: None,
            level: 0.95,
        }
    }
}

pub struct Lola {
    pub opts: LolaOptions,
}

impl Selector for Lola {
    fn name(&self) -> &str {
        "lola"
    }

    fn select(&self, x: &Matrix, y: &[f64]) -> Result<SelectorOutput> {
        let r = lola(x, y, &self.opts)?;
        Ok(SelectorOutput {
            selected: r.selected.clone(),
            report: Some(r),
        })
    }
}

pub struct Lol {
    pub t: f64,
    pub s: f64,
    pub opts: LolaOptions,
}

impl Selector for Lol {
    fn name(&self) -> &str {
        "lol"
    }

    fn select(&self, x: &Matrix, y: &[f64]) -> Result<SelectorOutput> {
        let r = lol(x, y, self.t, self.s, &self.opts)?;
        Ok(SelectorOutput {
            selected: r.selected.clone(),
            report: Some(r),
        })
    }
}

pub struct StudentBaseline {
    pub level: f64,
}

impl Selector for StudentBaseline {
    fn name(&self) -> &str {
        "student"
    }

    fn select(&self, x: &Matrix, y: &[f64]) -> Result<SelectorOutput> {
        Ok(SelectorOutput {
            selected: baseline_student(x, y, self.level)?,
            report: None,
        })
    }
}

pub struct StepwiseBaseline {
    pub level: f64,
}

impl Selector for StepwiseBaseline {
    fn name(&self) -> &str {
        "stepwise"
    }

    fn select(&self, x: &Matrix, y: &[f64]) -> Result<SelectorOutput> {
        Ok(SelectorOutput {
            selected: baseline_stepwise(x, y, self.level)?,
            report: None,
        })
    }
}

pub type SelectorFactory = fn(&SelectorParams) -> Result<Box<dyn Selector>>;

struct Entry {
    description: &'static str,
    factory: SelectorFactory,
}

#[derive(Default)]
pub struct SelectorRegistry {
    entries: BTreeMap<String, Entry>,
}

impl SelectorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register("lola", "two-step selection with data-driven thresholds", |p| {
            Ok(Box::new(Lola { opts: p.lola }))
        });
        r.register("lol", "two-step selection with manual thresholds t and s", |p| {
            match (p.t, p.s) {
                (Some(t), Some(s)) => Ok(Box::new(Lol { t, s, opts: p.lola })),
                _ => Err(Error::Domain("lol needs both t and s".into())),
            }
        });
        r.register("student", "full OLS with per-coefficient t tests", |p| {
            Ok(Box::new(StudentBaseline { level: p.level }))
        });
        r.register("stepwise", "forward/backward stepwise F tests", |p| {
            Ok(Box::new(StepwiseBaseline { level: p.level }))
        });
        r
    }

    /// Adds or replaces a strategy.
    pub fn register(&mut self, name: &str, description: &'static str, factory: SelectorFactory) {
        self.entries
            .insert(name.to_string(), Entry { description, factory });
    }

    pub fn build(&self, name: &str, params: &SelectorParams) -> Result<Box<dyn Selector>> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| Error::UnknownSelector(name.to_string()))?;
        (entry.factory)(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn describe(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e.description))
    }
}
