//! Dataset and configuration persistence, result tables, and heatmaps.
//!
//! All file writes are atomic: content goes to a temp file in the target
//! directory, then renames over the destination.

mod config;
mod dataset;
mod heatmap;
mod report;

pub use config::{
    DomainSection, PlantKind, PlantSection, ResolvedPlant, RunConfig, RunSection, SearchSection,
};
pub use dataset::{read_dataset, write_dataset, DatasetMeta};
pub use heatmap::{visit_ratios, write_heatmap_csv, write_heatmap_svg, HeatmapReport};
pub use report::{
    read_report_rows, write_mine_report, write_synthesis_report, ClauseScore, ReportRow,
};

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::logic::{ParseError, TraceError};
use crate::mining::MiningError;
use crate::plants::PlantError;

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: corrupt record: {msg}")]
    Corrupt {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: schema mismatch: {msg}")]
    Schema {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Writes bytes to `path` via a temp file and rename.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), FileError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
