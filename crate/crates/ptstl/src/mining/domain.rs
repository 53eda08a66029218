//! Search parameters and finite parameter grids for the formula search.


use super::{Dataset, MiningError};

/// Knobs of the formula search: operator-count bounds for mined general
/// parts, the clause budget, the minimum F_β gain per accepted clause, and
/// the F_β weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub oc_min: u32,
    pub oc_max: u32,
    /// `None` means unbounded.
    pub max_clauses: Option<usize>,
    pub min_gain: f64,
    pub beta: f64,
}

impl SearchParams {
    pub fn new(
        oc_min: u32,
        oc_max: u32,
        max_clauses: Option<usize>,
        min_gain: f64,
        beta: f64,
    ) -> Result<Self, MiningError> {
        if oc_min > oc_max {
            return Err(MiningError::OcBounds { oc_min, oc_max });
        }
        if !(beta > 0.0) {
            return Err(MiningError::BadBeta(beta));
        }
        if !(min_gain >= 0.0) {
            return Err(MiningError::BadMinGain(min_gain));
        }
        Ok(SearchParams {
            oc_min,
            oc_max,
            max_clauses,
            min_gain,
            beta,
        })
    }
}

impl Default for SearchParams {
    /// Single-clause search over atom-only general parts, accepting any
    /// strict F_1 improvement.
    fn default() -> Self {
        SearchParams {
            oc_min: 0,
            oc_max: 0,
            max_clauses: Some(1),
            min_gain: 0.0,
            beta: 1.0,
        }
    }
}

/// Finite candidate grids for every parameter slot a clause template can
/// declare: per-state-variable threshold grids, per-control-variable value
/// sets, the grid for the clause bound `b`, and the grid for interval
/// endpoints of temporal operators inside general parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDomain {
    state_grids: Vec<Vec<f64>>,
    control_values: Vec<Vec<f64>>,
    clause_bounds: Vec<u32>,
    inner_bounds: Vec<u32>,
}

pub const DEFAULT_CLAUSE_BOUNDS: [u32; 2] = [1, 2];
pub const DEFAULT_INNER_BOUNDS: [u32; 2] = [0, 1];

impl ParameterDomain {
    pub fn new(
        state_grids: Vec<Vec<f64>>,
        control_values: Vec<Vec<f64>>,
        clause_bounds: Vec<u32>,
        inner_bounds: Vec<u32>,
    ) -> Result<Self, MiningError> {
        for (i, grid) in state_grids.iter().enumerate() {
            if grid.is_empty() {
                return Err(MiningError::EmptyGrid(format!("state variable x{i}")));
            }
        }
        for (j, values) in control_values.iter().enumerate() {
            if values.is_empty() {
                return Err(MiningError::EmptyGrid(format!("control variable u{j}")));
            }
        }
        if clause_bounds.is_empty() {
            return Err(MiningError::EmptyGrid("clause bound b".into()));
        }
        if clause_bounds.contains(&0) {
            return Err(MiningError::BadClauseBound);
        }
        if inner_bounds.is_empty() {
            return Err(MiningError::EmptyGrid("inner time bounds".into()));
        }
        Ok(ParameterDomain {
            state_grids,
            control_values,
            clause_bounds,
            inner_bounds,
        })
    }

    /// Default grids for a dataset: an evenly stepped grid over
    /// `[floor(min), ceil(max)]` of each observed state variable, the
    /// dataset's control value sets, `b` in `{1,2}`, and inner time bounds
    /// in `{0,1}`.
    pub fn from_dataset(data: &Dataset, state_step: f64) -> Result<Self, MiningError> {
        let ranges = data.state_ranges().ok_or(MiningError::EmptyDataset)?;
        if !(state_step > 0.0) {
            return Err(MiningError::EmptyGrid("state grid step".into()));
        }
        let state_grids = ranges
            .iter()
            .map(|&(lo, hi)| grid_over(lo.floor(), hi.ceil(), state_step))
            .collect();
        Ok(ParameterDomain {
            state_grids,
            control_values: data.control_space().sets().to_vec(),
            clause_bounds: DEFAULT_CLAUSE_BOUNDS.to_vec(),
            inner_bounds: DEFAULT_INNER_BOUNDS.to_vec(),
        })
    }

    pub fn with_clause_bounds(mut self, bounds: Vec<u32>) -> Result<Self, MiningError> {
        if bounds.is_empty() {
            return Err(MiningError::EmptyGrid("clause bound b".into()));
        }
        if bounds.contains(&0) {
            return Err(MiningError::BadClauseBound);
        }
        self.clause_bounds = bounds;
        Ok(self)
    }

    pub fn with_inner_bounds(mut self, bounds: Vec<u32>) -> Result<Self, MiningError> {
        if bounds.is_empty() {
            return Err(MiningError::EmptyGrid("inner time bounds".into()));
        }
        self.inner_bounds = bounds;
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.state_grids.len()
    }

    pub fn control_dim(&self) -> usize {
        self.control_values.len()
    }

    pub fn state_grid(&self, var: usize) -> &[f64] {
        &self.state_grids[var]
    }

    pub fn control_grid(&self, var: usize) -> &[f64] {
        &self.control_values[var]
    }

    pub fn clause_bounds(&self) -> &[u32] {
        &self.clause_bounds
    }

    pub fn inner_bounds(&self) -> &[u32] {
        &self.inner_bounds
    }

    /// Checks the domain covers a dataset's dimensions.
    pub fn check_against(&self, data: &Dataset) -> Result<(), MiningError> {
        if self.state_grids.len() != data.state_dim() {
            return Err(MiningError::DomainMismatch {
                found: self.state_grids.len(),
                expected: data.state_dim(),
            });
        }
        if self.control_values.len() != data.control_dim() {
            return Err(MiningError::DomainMismatch {
                found: self.control_values.len(),
                expected: data.control_dim(),
            });
        }
        Ok(())
    }
}

fn grid_over(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut v = lo;
    let eps = step * 1e-9;
    while v <= hi + eps {
        grid.push(v);
        v += step;
    }
    if grid.is_empty() {
        grid.push(lo);
    }
    grid
}
