use alloc::string::String;

use chrono::NaiveDate;

/// Errors raised by the index and verification routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("probability level {0} outside the admissible range")]
    LevelOutOfRange(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("percentile grid needs exactly 101 non-decreasing finite thresholds")]
    InvalidGrid,
    #[error("only {pooled} values pooled for location {location} around day {day_of_year}")]
    InsufficientClimate {
        location: String,
        day_of_year: u16,
        pooled: usize,
    },
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("climate scale sigma + k is zero")]
    ZeroScale,
    #[error("forecast and climate location sets differ (first mismatch: {0})")]
    LocationMismatch(String),
    #[error("no observation climate for location {location} on {date}")]
    MissingClimate { location: String, date: NaiveDate },
    #[error("sample has no events or no non-events")]
    DegenerateSample,
    #[error("reference AUC is 1, skill score undefined")]
    ReferencePerfect,
    #[error("need at least two shared non-missing points, got {0}")]
    TooFewPoints(usize),
    #[error("condition quantile {condition} must be below event quantile {event}")]
    QuantileOrder { condition: f64, event: f64 },
    #[error("block bootstrap needs at least two blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("bin edges must be finite and strictly increasing with at least two edges")]
    BadBins,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("no single upward crossing between the analytic distributions")]
    NoQualifyingCrossing,
}

pub type Result<T> = core::result::Result<T, Error>;
