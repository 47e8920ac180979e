//! Instance files, synthetic instance generation, result reports and the
//! benchmark driver.

mod bench;
mod generate;
mod instance;
mod report;

pub use bench::{bench_csv, run_bench, BenchConfig, BenchRow, BENCH_COLUMNS};
pub use generate::{generate_instance, profile_counts, GeneratorParams};
pub use instance::{instance_to_string, load_instance, parse_instance, save_instance};
pub use report::{cuts_csv, report_json, write_cuts_csv, write_report, REPORT_VERSION};

use crate::engine::EngineError;
use crate::model::ModelError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid field {field}: {message}")]
    Schema { field: String, message: String },
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IoError {
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::File { path: path.to_path_buf(), source }
    }
}
