//! Learning Out of Leaders: a two-step thresholding selector for sparse,
//! high-dimensional linear regression.
//!
//! The pipeline normalizes the predictors by their uncentered second
//! moment, keeps the columns most correlated with the response
//! ("leaders"), fits least squares on the leaders only and keeps the
//! coefficients above a second threshold. [`select::lola`] chooses both
//! thresholds from the data with the two-cluster deviance split in
//! [`split`].
//!
//! Around the selector the crate ships simulation generators
//! ([`simgen`]), classical baselines, a selector registry for picking a
//! strategy by name, and a control-variable workflow for
//! instrumental-variable style inference ([`ivpipe`]).

pub mod error;
pub mod ivpipe;
pub mod linalg;
pub mod select;
pub mod simgen;
pub mod split;

pub use error::{Error, Result};
pub use linalg::{Matrix, StandardizedDesign};
pub use select::registry::{Selector, SelectorOutput, SelectorParams, SelectorRegistry};
pub use select::{lol, lola, CapMode, SelectionReport};
pub use split::{deviance_split, BoundaryRule, SplitResult};

/// Library version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
