//! Simulatable plants `x_{k+1} = f(x_k, u_k, w_k)` with per-step labelers
//! marking unwanted events, plus the random-control baseline policy.

pub mod external;
pub mod grid;
pub mod traffic;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::logic::{ControlSpace, Trace, TraceError};
use crate::mining::{Dataset, LabeledTrace, MiningError};
use crate::seed::rng_for;

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("state has dimension {found}, plant expects {expected}")]
    StateDim { expected: usize, found: usize },
    #[error("control has dimension {found}, plant expects {expected}")]
    ControlDim { expected: usize, found: usize },
    #[error("state out of bounds: component {index} is {value}, allowed [{lo}, {hi}]")]
    StateOutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("control value {value} at dimension {dim} is not in the control set")]
    ControlNotInSet { dim: usize, value: f64 },
    #[error("invalid plant config: {0}")]
    BadConfig(String),
    #[error("external plant process exited")]
    ProcessExited,
    #[error("external plant sent a malformed reply: {0}")]
    MalformedReply(String),
    #[error("external plant reply has dimension {found}, expected {expected}")]
    ReplyDim { expected: usize, found: usize },
    #[error("external plant timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Mining(#[from] MiningError),
}

/// A discrete-time control system with a finite control set.
pub trait Plant {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn control_space(&self) -> ControlSpace;
    /// Samples an initial state from the plant's initial distribution.
    fn initial_state(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PlantError>;
    /// One step of the dynamics; `rng` drives the plant's noise.
    fn step(&mut self, x: &[f64], u: &[f64], rng: &mut ChaCha8Rng)
        -> Result<Vec<f64>, PlantError>;
}

/// Marks unwanted events: `true` labels `(x_k, u_k)` as a violation.
pub trait Labeler {
    fn label(&self, x: &[f64], u: &[f64]) -> bool;
}

impl<F: Fn(&[f64], &[f64]) -> bool> Labeler for F {
    fn label(&self, x: &[f64], u: &[f64]) -> bool {
        self(x, u)
    }
}

/// Simulates the plant under uniformly random controls and labels each step.
/// Deterministic in `seed`: trace `t` draws from the derived streams
/// `(seed, "plant", t)` and `(seed, "control", t)`.
pub fn simulate_random(
    plant: &mut dyn Plant,
    labeler: &dyn Labeler,
    traces: usize,
    len: usize,
    seed: u64,
) -> Result<Dataset, PlantError> {
    let space = plant.control_space();
    let combos = space.combos();
    let mut labeled = Vec::with_capacity(traces);
    for t in 0..traces {
        let mut plant_rng = rng_for(seed, "plant", t as u64);
        let mut control_rng = rng_for(seed, "control", t as u64);
        let mut x = plant.initial_state(&mut plant_rng)?;
        let mut trace = Trace::new(plant.state_dim(), plant.control_dim());
        let mut labels = Vec::with_capacity(len);
        for k in 0..len {
            let u = combos[control_rng.gen_range(0..combos.len())].clone();
            labels.push(labeler.label(&x, &u));
            trace.push(x.clone(), u.clone())?;
            if k + 1 < len {
                x = plant.step(&x, &u, &mut plant_rng)?;
            }
        }
        labeled.push(LabeledTrace::new(trace, labels)?);
    }
    Ok(Dataset::new(
        plant.state_dim(),
        plant.control_dim(),
        space,
        labeled,
    )?)
}

#[cfg(test)]
mod tests {
    use super::grid::{DangerLabeler, GridConfig, GridPlant};
    use super::*;

    #[test]
    fn no_danger_cells_means_no_labels() {
        let cfg = GridConfig::new(4, 4, vec![]).unwrap();
        let mut plant = GridPlant::new(cfg.clone()).unwrap();
        let labeler = DangerLabeler::new(&cfg);
        let data = simulate_random(&mut plant, &labeler, 3, 20, 9).unwrap();
        assert_eq!(data.violations(), 0);
        assert_eq!(data.total_points(), 60);
    }

    #[test]
    fn zero_traces_gives_empty_dataset() {
        let cfg = GridConfig::new(4, 4, vec![]).unwrap();
        let mut plant = GridPlant::new(cfg.clone()).unwrap();
        let labeler = DangerLabeler::new(&cfg);
        let data = simulate_random(&mut plant, &labeler, 0, 20, 9).unwrap();
        assert!(data.is_empty());
    }

    #[test]
    fn simulation_is_deterministic_in_seed() {
        let cfg = GridConfig::new(5, 5, vec![(2, 2)]).unwrap();
        let labeler = DangerLabeler::new(&cfg);
        let mut plant = GridPlant::new(cfg).unwrap();
        let a = simulate_random(&mut plant, &labeler, 4, 30, 77).unwrap();
        let b = simulate_random(&mut plant, &labeler, 4, 30, 77).unwrap();
        assert_eq!(a, b);
        let c = simulate_random(&mut plant, &labeler, 4, 30, 78).unwrap();
        assert_ne!(a, c);
    }
}
