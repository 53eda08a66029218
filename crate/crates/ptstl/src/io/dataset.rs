//! Line-oriented dataset files: a JSON header line followed by one JSON
//! record per trace. Self-describing and byte-stable across
//! write -> read -> write.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::logic::{ControlSpace, Trace};
use crate::mining::{Dataset, LabeledTrace};

use super::{atomic_write, FileError};

const SCHEMA: &str = "ptstl.dataset";
const VERSION: u32 = 1;

/// Provenance carried in the header: which plant and generator produced the
/// data, under which root seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub plant: String,
    pub seed: u64,
    pub generator: String,
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
    n: usize,
    m: usize,
    control_sets: Vec<Vec<f64>>,
    traces: usize,
    plant: String,
    seed: u64,
    generator: String,
}

#[derive(Serialize, Deserialize)]
struct TraceRecord {
    x: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    l: Vec<u8>,
}

/// Writes the dataset as one header line plus one line per trace.
pub fn write_dataset(path: &Path, data: &Dataset, meta: &DatasetMeta) -> Result<(), FileError> {
    let header = Header {
        schema: SCHEMA.into(),
        version: VERSION,
        n: data.state_dim(),
        m: data.control_dim(),
        control_sets: data.control_space().sets().to_vec(),
        traces: data.len(),
        plant: meta.plant.clone(),
        seed: meta.seed,
        generator: meta.generator.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for lt in data.traces() {
        let record = TraceRecord {
            x: lt.trace.samples().iter().map(|s| s.state.clone()).collect(),
            u: lt
                .trace
                .samples()
                .iter()
                .map(|s| s.control.clone())
                .collect(),
            l: lt.labels.iter().map(|&b| u8::from(b)).collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a dataset file back; validates the schema, per-record dimensions,
/// and that control values belong to the declared space.
pub fn read_dataset(path: &Path) -> Result<(Dataset, DatasetMeta), FileError> {
    let path_str = path.display().to_string();
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();

    let (_, header_line) = lines.next().ok_or_else(|| FileError::Corrupt {
        path: path_str.clone(),
        line: 1,
        msg: "empty file, expected a header".into(),
    })?;
    let header: Header = serde_json::from_str(header_line).map_err(|e| FileError::Corrupt {
        path: path_str.clone(),
        line: 1,
        msg: e.to_string(),
    })?;
    if header.schema != SCHEMA || header.version != VERSION {
        return Err(FileError::Schema {
            path: path_str,
            line: 1,
            msg: format!(
                "expected {SCHEMA} v{VERSION}, found {} v{}",
                header.schema, header.version
            ),
        });
    }
    let space = ControlSpace::new(header.control_sets.clone())?;

    let mut traces = Vec::with_capacity(header.traces);
    for index in 0..header.traces {
        let expected_line = index + 2;
        let (line_idx, line) = lines.next().ok_or_else(|| FileError::Corrupt {
            path: path_str.clone(),
            line: expected_line,
            msg: format!(
                "file ends after {} of {} trace records",
                index, header.traces
            ),
        })?;
        let line_no = line_idx + 1;
        let record: TraceRecord = serde_json::from_str(line).map_err(|e| FileError::Corrupt {
            path: path_str.clone(),
            line: line_no,
            msg: e.to_string(),
        })?;
        if record.x.len() != record.u.len() || record.x.len() != record.l.len() {
            return Err(FileError::Corrupt {
                path: path_str.clone(),
                line: line_no,
                msg: format!(
                    "x/u/l lengths differ: {}/{}/{}",
                    record.x.len(),
                    record.u.len(),
                    record.l.len()
                ),
            });
        }
        let mut trace = Trace::new(header.n, header.m);
        for (x, u) in record.x.into_iter().zip(record.u) {
            if u.len() == header.m && !space.contains(&u) {
                return Err(FileError::Schema {
                    path: path_str.clone(),
                    line: line_no,
                    msg: format!("control vector {u:?} not in the declared control space"),
                });
            }
            trace.push(x, u).map_err(|e| FileError::Schema {
                path: path_str.clone(),
                line: line_no,
                msg: e.to_string(),
            })?;
        }
        let labels = record.l.iter().map(|&b| b != 0).collect();
        let lt = LabeledTrace::new(trace, labels).map_err(|e| FileError::Corrupt {
            path: path_str.clone(),
            line: line_no,
            msg: e.to_string(),
        })?;
        traces.push(lt);
    }
    let data = Dataset::new(header.n, header.m, space, traces)?;
    Ok((
        data,
        DatasetMeta {
            plant: header.plant,
            seed: header.seed,
            generator: header.generator,
        },
    ))
}
