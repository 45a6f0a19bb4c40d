//! File formats: run configuration, observation logs, result tables and
//! plots.

pub mod config;
pub mod observations;
pub mod plot;
pub mod results;

use thiserror::Error;

pub use config::{parse_config, parse_config_str, serialize_config, RunConfig};
pub use observations::{load_observations, read_observation_records, write_observations, ObservationRecord};
pub use plot::{emit_plot, render_svg, PlotKind};
pub use results::{format_sig6, write_results};

/// Failures at the file boundary.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("`{field}` out of range: {message}")]
    OutOfRange { field: String, message: String },

    /// `row` counts data rows from 1; 0 refers to the header.
    #[error("schema error in row {row}: {message}")]
    Schema { row: usize, message: String },

    #[error("at least 2 rows need a range_m value, found {0}")]
    InsufficientRangedRows(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Core(#[from] crate::error::Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}
