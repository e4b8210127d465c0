//! File formats, Monte Carlo campaigns and the `arrowwalk` command-line
//! driver built on the `arrowwalk` crate.

pub mod formats;
pub mod montecarlo;
pub mod table;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] arrowwalk::Error),
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
