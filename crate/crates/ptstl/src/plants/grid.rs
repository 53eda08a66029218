//! Grid-world robot: a planar arena of `rows x cols` cells, four moves, and
//! a set of dangerous cells the robot senses only while inside them.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::logic::ControlSpace;

use super::{Labeler, Plant, PlantError};

/// The four moves, encoded as control values 0..=3 in formula text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    North,
    East,
    South,
    West,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::North, Move::East, Move::South, Move::West];

    pub fn value(self) -> f64 {
        match self {
            Move::North => 0.0,
            Move::East => 1.0,
            Move::South => 2.0,
            Move::West => 3.0,
        }
    }

    pub fn from_value(value: f64) -> Option<Move> {
        Move::ALL.into_iter().find(|m| m.value() == value)
    }

    pub fn name(self) -> &'static str {
        match self {
            Move::North => "N",
            Move::East => "E",
            Move::South => "S",
            Move::West => "W",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    /// Dangerous cells as `(row, col)` pairs.
    #[serde(default)]
    pub danger: Vec<(usize, usize)>,
}

impl GridConfig {
    pub fn new(
        rows: usize,
        cols: usize,
        danger: Vec<(usize, usize)>,
    ) -> Result<Self, PlantError> {
        let cfg = GridConfig { rows, cols, danger };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(PlantError::BadConfig("grid must be non-empty".into()));
        }
        for &(r, c) in &self.danger {
            if r >= self.rows || c >= self.cols {
                return Err(PlantError::BadConfig(format!(
                    "danger cell ({r},{c}) outside {}x{} grid",
                    self.rows, self.cols
                )));
            }
        }
        if self.danger_set().len() >= self.rows * self.cols {
            return Err(PlantError::BadConfig(
                "every cell is dangerous; no initial cell remains".into(),
            ));
        }
        Ok(())
    }

    pub fn danger_set(&self) -> BTreeSet<(usize, usize)> {
        self.danger.iter().copied().collect()
    }

    /// The 8x7 arena with two corner-anchored danger blocks.
    pub fn arena_8x7() -> Self {
        let mut danger = Vec::new();
        for r in 0..2 {
            for c in 0..4 {
                danger.push((r, c));
            }
        }
        for r in 4..8 {
            for c in 4..7 {
                danger.push((r, c));
            }
        }
        GridConfig {
            rows: 8,
            cols: 7,
            danger,
        }
    }
}

/// Moves one cell in the commanded direction, clamped to the arena.
pub fn robot_step(x: (usize, usize), mv: Move, rows: usize, cols: usize) -> (usize, usize) {
    let (row, col) = x;
    match mv {
        Move::North => (row.saturating_sub(1), col),
        Move::South => ((row + 1).min(rows - 1), col),
        Move::East => (row, (col + 1).min(cols - 1)),
        Move::West => (row, col.saturating_sub(1)),
    }
}

/// The robot plant: state `[row, col]`, one control dimension over
/// `{N, E, S, W}` encoded as `{0, 1, 2, 3}`. The initial cell is uniform
/// over the non-dangerous cells.
#[derive(Debug, Clone)]
pub struct GridPlant {
    cfg: GridConfig,
    free_cells: Vec<(usize, usize)>,
}

impl GridPlant {
    pub fn new(cfg: GridConfig) -> Result<Self, PlantError> {
        cfg.validate()?;
        let danger = cfg.danger_set();
        let free_cells = (0..cfg.rows)
            .flat_map(|r| (0..cfg.cols).map(move |c| (r, c)))
            .filter(|cell| !danger.contains(cell))
            .collect();
        Ok(GridPlant { cfg, free_cells })
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    fn cell_of(&self, x: &[f64]) -> Result<(usize, usize), PlantError> {
        if x.len() != 2 {
            return Err(PlantError::StateDim {
                expected: 2,
                found: x.len(),
            });
        }
        let row = x[0];
        let col = x[1];
        if row.fract() != 0.0 || !(0.0..self.cfg.rows as f64).contains(&row) {
            return Err(PlantError::StateOutOfBounds {
                index: 0,
                value: row,
                lo: 0.0,
                hi: (self.cfg.rows - 1) as f64,
            });
        }
        if col.fract() != 0.0 || !(0.0..self.cfg.cols as f64).contains(&col) {
            return Err(PlantError::StateOutOfBounds {
                index: 1,
                value: col,
                lo: 0.0,
                hi: (self.cfg.cols - 1) as f64,
            });
        }
        Ok((row as usize, col as usize))
    }
}

impl Plant for GridPlant {
    fn state_dim(&self) -> usize {
        2
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn control_space(&self) -> ControlSpace {
        ControlSpace::new(vec![Move::ALL.iter().map(|m| m.value()).collect()])
            .expect("four moves")
    }

    fn initial_state(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PlantError> {
        let (r, c) = self.free_cells[rng.gen_range(0..self.free_cells.len())];
        Ok(vec![r as f64, c as f64])
    }

    fn step(
        &mut self,
        x: &[f64],
        u: &[f64],
        _rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, PlantError> {
        let cell = self.cell_of(x)?;
        if u.len() != 1 {
            return Err(PlantError::ControlDim {
                expected: 1,
                found: u.len(),
            });
        }
        let mv = Move::from_value(u[0]).ok_or(PlantError::ControlNotInSet {
            dim: 0,
            value: u[0],
        })?;
        let (r, c) = robot_step(cell, mv, self.cfg.rows, self.cfg.cols);
        Ok(vec![r as f64, c as f64])
    }
}

/// Labels a step 1 iff the robot is inside the dangerous region.
#[derive(Debug, Clone)]
pub struct DangerLabeler {
    danger: BTreeSet<(usize, usize)>,
}

impl DangerLabeler {
    pub fn new(cfg: &GridConfig) -> Self {
        DangerLabeler {
            danger: cfg.danger_set(),
        }
    }
}

impl Labeler for DangerLabeler {
    fn label(&self, x: &[f64], _u: &[f64]) -> bool {
        if x.len() != 2 || x[0].fract() != 0.0 || x[1].fract() != 0.0 || x[0] < 0.0 || x[1] < 0.0 {
            return false;
        }
        self.danger.contains(&(x[0] as usize, x[1] as usize))
    }
}
