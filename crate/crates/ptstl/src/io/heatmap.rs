//! Per-cell visit-ratio heatmaps for grid-robot datasets: exact ratios as
//! CSV and a proportionally shaded SVG.

use std::path::Path;

use crate::mining::Dataset;
use crate::plants::grid::GridConfig;

use super::{atomic_write, FileError};

/// Row-major grid of visit ratios; ratios sum to 1 over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapReport {
    pub rows: usize,
    pub cols: usize,
    pub ratios: Vec<f64>,
}

impl HeatmapReport {
    pub fn ratio(&self, row: usize, col: usize) -> f64 {
        self.ratios[row * self.cols + col]
    }
}

/// Counts visits per cell across all samples and normalizes by the total
/// sample count. Errors if the dataset is not a grid dataset (2-dim integer
/// states within the arena).
pub fn visit_ratios(data: &Dataset, cfg: &GridConfig) -> Result<HeatmapReport, FileError> {
    if data.state_dim() != 2 {
        return Err(FileError::Config(format!(
            "heatmaps need a 2-dim grid dataset, state dimension is {}",
            data.state_dim()
        )));
    }
    let mut counts = vec![0u64; cfg.rows * cfg.cols];
    let mut total = 0u64;
    for lt in data.traces() {
        for sample in lt.trace.samples() {
            let (row, col) = (sample.state[0], sample.state[1]);
            let in_grid = row.fract() == 0.0
                && col.fract() == 0.0
                && (0.0..cfg.rows as f64).contains(&row)
                && (0.0..cfg.cols as f64).contains(&col);
            if !in_grid {
                return Err(FileError::Config(format!(
                    "state [{row}, {col}] is not a cell of the {}x{} grid",
                    cfg.rows, cfg.cols
                )));
            }
            counts[row as usize * cfg.cols + col as usize] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(FileError::Config("empty dataset has no visits".into()));
    }
    Ok(HeatmapReport {
        rows: cfg.rows,
        cols: cfg.cols,
        ratios: counts.iter().map(|&c| c as f64 / total as f64).collect(),
    })
}

/// One CSV row per grid row, exact ratios.
pub fn write_heatmap_csv(path: &Path, report: &HeatmapReport) -> Result<(), FileError> {
    let mut out = String::new();
    for row in 0..report.rows {
        let cells: Vec<String> = (0..report.cols)
            .map(|col| report.ratio(row, col).to_string())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Cells shaded proportionally to their visit ratio; danger cells get a red
/// border.
pub fn write_heatmap_svg(
    path: &Path,
    report: &HeatmapReport,
    cfg: &GridConfig,
) -> Result<(), FileError> {
    const CELL: usize = 40;
    let danger = cfg.danger_set();
    let width = report.cols * CELL;
    let height = report.rows * CELL;
    let max_ratio = report
        .ratios
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    );
    for row in 0..report.rows {
        for col in 0..report.cols {
            let ratio = report.ratio(row, col);
            let shade = 255 - (ratio / max_ratio * 200.0).round() as u8;
            let stroke = if danger.contains(&(row, col)) {
                "#cc0000"
            } else {
                "#999999"
            };
            svg.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" \
                 fill=\"rgb({shade},{shade},{shade})\" stroke=\"{stroke}\" stroke-width=\"2\">\
                 <title>({row},{col}): {ratio:.4}</title></rect>\n",
                col * CELL,
                row * CELL,
            ));
        }
    }
    svg.push_str("</svg>\n");
    atomic_write(path, svg.as_bytes())
}
