use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("no usable predictors")]
    NoUsablePredictors,

    #[error("coherence needs at least two retained columns, got {0}")]
    TooFewColumns(usize),

    #[error("underdetermined subset: {cols} columns for {rows} rows")]
    UnderdeterminedSubset { cols: usize, rows: usize },

    #[error("empty column subset")]
    EmptySubset,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("deviance split needs at least two values, got {0}")]
    TooFewValues(usize),

    #[error("no leaders above threshold")]
    NoLeaders,

    #[error("screening split degenerate")]
    ScreeningSplitDegenerate,

    #[error("baseline selectors need p < n (p = {p}, n = {n})")]
    TooManyPredictors { p: usize, n: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("box column {0} empty on the grid after 100 draws")]
    EmptyBox(usize),

    #[error("empty instrument set")]
    EmptyDictionary,

    #[error("no residual degrees of freedom")]
    NoResidualDof,

    #[error("focal regressor is collinear with the controls")]
    FocalCollinear,

    #[error("pipeline unstable on this dataset: {failed} of {total} runs failed")]
    PipelineUnstable { failed: usize, total: usize },

    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
}

pub type Result<T> = std::result::Result<T, Error>;
