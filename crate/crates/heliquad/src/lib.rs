//! File formats and configuration for `heliquad-core`.
//!
//! Everything here is I/O: TOML parameter files, CSV tables and logs, the
//! model text format and the mission script format. The numerics live in the
//! core crate.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod config;
pub mod logcsv;
pub mod mission;
pub mod model;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("line {line}: {msg}")]
    Line { line: u64, msg: String },
    #[error("{0}")]
    Invalid(String),
}

impl FormatError {
    pub(crate) fn at(line: u64, msg: impl Into<String>) -> Self {
        FormatError::Line { line, msg: msg.into() }
    }
}

/// Parses one float field, naming the line and column on failure.
pub(crate) fn parse_f64(s: &str, line: u64, what: &str) -> Result<f64, FormatError> {
    s.trim().parse::<f64>().map_err(|_| FormatError::at(line, format!("bad {what} value {s:?}")))
}
