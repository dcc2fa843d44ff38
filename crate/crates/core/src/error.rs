use thiserror::Error;

/// Failures of the series, smoothing and analysis stages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("degenerate day: {0}")]
    DegenerateDay(String),
    #[error("insufficient data: need at least {needed} spread changes, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("window layout does not fit a series of {0} observations")]
    LayoutMismatch(usize),
    #[error("{0} unavailable")]
    Unavailable(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
