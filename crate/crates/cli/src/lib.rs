//! File formats and command line for `wxindex-core`: synthetic datasets on
//! disk, climates, index files and verification results, all as CSV.

pub mod cli;
pub mod error;
pub mod io;
pub mod pipeline;

pub use error::{CliError, CliResult};
