//! Ensemble-derived indices for high-impact weather and the statistics used
//! to verify them as actionable forecasts.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and anything touching the filesystem live in the `wxindex` crate.
//!
//! * [`distributions`]: empirical CDFs, quantiles and 101-point percentile grids.
//! * [`climatology`]: day-of-year climate distributions built from an archive.
//! * [`indices`]: crossing-point forecast (CPF), extreme forecast index (EFI),
//!   shift of tails (SOT) and standardised anomaly (ANF).
//! * [`verification`]: contingency tables, ROC, economic value, reliability,
//!   Kendall tau and block bootstrap.
//! * [`synthgen`]: synthetic truth/ensemble/reforecast generator and analytic
//!   CPF oracle.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod climatology;
pub mod distributions;
mod error;
pub mod indices;
pub mod special;
pub mod synthgen;
pub mod verification;

pub use error::{Error, Result};
