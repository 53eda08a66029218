//! CSV result tables: the per-iteration synthesis report mirroring the
//! violation-count tables, and the per-clause mining score report.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::SynthesisRun;

use super::{atomic_write, FileError};

/// One row of the synthesis report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub i: usize,
    pub violations: u64,
    pub points: u64,
    pub formula: String,
    pub tp: String,
    pub fp: String,
}

/// Columns: `i, violations, points, formula, tp, fp` — one row per
/// iteration; the terminal row carries the final dataset's counts and an
/// empty formula cell.
pub fn write_synthesis_report(path: &Path, run: &SynthesisRun) -> Result<(), FileError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["i", "violations", "points", "formula", "tp", "fp"])?;
    for record in &run.iterations {
        let (formula, tp, fp) = match &record.mined {
            Some(mined) => (
                mined.cause.to_string(),
                mined.true_positives.to_string(),
                mined.false_positives.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        writer.write_record([
            record.index.to_string(),
            record.violations.to_string(),
            record.points.to_string(),
            formula,
            tp,
            fp,
        ])?;
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    atomic_write(path, &bytes)
}

pub fn read_report_rows(path: &Path) -> Result<Vec<ReportRow>, FileError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Per-clause scores of a mined combined cause on its dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseScore {
    pub clause: String,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub f_beta: f64,
    /// F_β of the disjunction of clauses up to and including this one.
    pub cumulative_f_beta: f64,
}

pub fn write_mine_report(path: &Path, scores: &[ClauseScore]) -> Result<(), FileError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["clause", "tp", "fp", "tn", "fn", "f_beta", "cumulative_f_beta"])?;
    for score in scores {
        writer.write_record([
            score.clause.clone(),
            score.tp.to_string(),
            score.fp.to_string(),
            score.tn.to_string(),
            score.fn_.to_string(),
            score.f_beta.to_string(),
            score.cumulative_f_beta.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    atomic_write(path, &bytes)
}
