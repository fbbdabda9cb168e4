use alloc::boxed::Box;
use alloc::string::String;

use chrono::NaiveDate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0}: input is empty")]
    Empty(&'static str),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dates must be strictly increasing (at index {index}, {date})")]
    UnorderedDates { index: usize, date: NaiveDate },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },

    #[error("duplicate series id `{0}`")]
    DuplicateSeries(String),

    #[error("unknown series id `{0}`")]
    UnknownSeries(String),

    #[error("series have no dates in common")]
    EmptyIntersection,

    #[error("train fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("split index {split} leaves an empty partition of {len} rows")]
    InvalidSplit { split: usize, len: usize },

    #[error("panel has not been split into train and test rows")]
    NotSplit,

    #[error("series of length {len} is too short, at least {needed} points are required")]
    TooShort { len: usize, needed: usize },

    #[error("denominator vanishes at source index {index}")]
    ZeroDenominator { index: usize },

    #[error("min-max range is degenerate (min {min}, max {max})")]
    ConstantRange { min: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("autoregressive coefficient {0} is not stationary")]
    NonStationary(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("feature sources are built on different date axes ({expected} vs {found} points)")]
    MismatchedAxis { expected: usize, found: usize },

    #[error("no rows satisfy every lag and horizon requirement")]
    NoUsableRows,

    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("trial {trial} failed: {source}")]
    Trial { trial: usize, source: Box<Error> },
}
