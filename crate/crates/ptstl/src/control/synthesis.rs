//! Closed-loop simulation and the iterative refinement loop: mine a cause
//! from the current dataset, extend the avoidance controller, simulate,
//! repeat until the violation rate drops below the bound.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::logic::Trace;
use crate::mining::{
    confusion_counts, formula_search, CombinedCause, Dataset, LabeledTrace, MiningError,
    ParameterDomain, SearchParams,
};
use crate::plants::{simulate_random, Labeler, Plant, PlantError};
use crate::seed::{derive_seed, rng_for};

use super::controller::{CauseController, FallbackMode};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error("invalid synthesis config: {0}")]
    BadConfig(String),
}

/// Simulates `traces` closed-loop runs of `len` steps each, labeling every
/// step. Each trace `t` draws from derived streams `(seed, "plant", t)` and
/// `(seed, "controller", t)`, so results are independent of trace scheduling.
pub fn run_closed_loop(
    plant: &mut dyn Plant,
    labeler: &dyn Labeler,
    cause: &CombinedCause,
    traces: usize,
    len: usize,
    seed: u64,
    fallback: FallbackMode,
) -> Result<Dataset, PlantError> {
    let space = plant.control_space();
    let mut labeled = Vec::with_capacity(traces);
    for t in 0..traces {
        let mut plant_rng = rng_for(seed, "plant", t as u64);
        let mut controller = CauseController::new(cause, derive_seed(seed, "controller", t as u64))
            .with_fallback(fallback);
        let mut x = plant.initial_state(&mut plant_rng)?;
        let mut trace = Trace::new(plant.state_dim(), plant.control_dim());
        let mut labels = Vec::with_capacity(len);
        for k in 0..len {
            let u = controller.step(&x, &space)?;
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

/// Where the threshold grids come from: given explicitly, or derived from
/// the first dataset (an evenly stepped grid over each state variable's
/// observed range).
#[derive(Debug, Clone)]
pub enum DomainSpec {
    Explicit(ParameterDomain),
    Derived {
        state_step: f64,
        clause_bounds: Vec<u32>,
        inner_bounds: Vec<u32>,
    },
}

#[derive(Debug, Clone)]
pub struct SynthesisConfig {
    pub search: SearchParams,
    pub domain: DomainSpec,
    /// Stop once the violation rate is at or below this bound.
    pub bound: f64,
    pub traces: usize,
    pub trace_len: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub fallback: FallbackMode,
}

impl SynthesisConfig {
    fn validate(&self) -> Result<(), SynthesisError> {
        if !(0.0..=1.0).contains(&self.bound) {
            return Err(SynthesisError::BadConfig(format!(
                "bound must be in [0, 1], got {}",
                self.bound
            )));
        }
        if self.traces == 0 {
            return Err(SynthesisError::BadConfig("traces must be positive".into()));
        }
        if self.trace_len < 2 {
            return Err(SynthesisError::BadConfig(
                "trace length must be at least 2".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(SynthesisError::BadConfig(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The formula mined in one iteration, with its own classifier counts on the
/// dataset it was mined from.
#[derive(Debug, Clone)]
pub struct MinedFormula {
    pub cause: CombinedCause,
    pub true_positives: u64,
    pub false_positives: u64,
}

/// One refinement iteration: the dataset statistics it mined from, and what
/// was mined (`None` on the terminal record).
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub index: usize,
    /// Label-1 count over all samples of the iteration's dataset.
    pub violations: u64,
    /// Total samples in the dataset.
    pub points: u64,
    /// Stop-test rate of the dataset.
    pub rate: f64,
    pub mined: Option<MinedFormula>,
    pub wall: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisOutcome {
    /// The violation rate reached the bound.
    Converged,
    /// The search returned no clause.
    NoGain,
    /// The iteration cap was reached before the bound.
    IterationCapReached,
}

#[derive(Debug, Clone)]
pub struct SynthesisRun {
    pub bound: f64,
    pub iterations: Vec<IterationRecord>,
    pub outcome: SynthesisOutcome,
    pub final_rate: f64,
}

/// The iterative refinement loop. Starts from a random-control dataset,
/// then repeatedly mines a cause formula, extends the combined cause, and
/// simulates the closed loop, until the violation rate is at or below
/// `bound`, the search returns no clause, or the iteration cap is hit (the
/// cap is reported in the outcome, never silently looped).
///
/// The initial dataset never triggers the stop test; at least one formula
/// search runs.
pub fn synthesize_iterative(
    plant: &mut dyn Plant,
    labeler: &dyn Labeler,
    cfg: &SynthesisConfig,
) -> Result<(CombinedCause, SynthesisRun), SynthesisError> {
    cfg.validate()?;
    let mut psi = CombinedCause::empty();
    let mut data = simulate_random(
        plant,
        labeler,
        cfg.traces,
        cfg.trace_len,
        derive_seed(cfg.seed, "iteration", 0),
    )?;
    let domain = match &cfg.domain {
        DomainSpec::Explicit(domain) => domain.clone(),
        DomainSpec::Derived {
            state_step,
            clause_bounds,
            inner_bounds,
        } => ParameterDomain::from_dataset(&data, *state_step)?
            .with_clause_bounds(clause_bounds.clone())?
            .with_inner_bounds(inner_bounds.clone())?,
    };

    let mut iterations = Vec::new();
    let mut index = 1;
    let outcome = loop {
        let violations = data.violations();
        let points = data.total_points();
        let rate = data.violation_rate();
        if index > 1 && rate <= cfg.bound {
            iterations.push(IterationRecord {
                index,
                violations,
                points,
                rate,
                mined: None,
                wall: Duration::ZERO,
            });
            break SynthesisOutcome::Converged;
        }
        if index > cfg.max_iterations {
            iterations.push(IterationRecord {
                index,
                violations,
                points,
                rate,
                mined: None,
                wall: Duration::ZERO,
            });
            break SynthesisOutcome::IterationCapReached;
        }
        let started = Instant::now();
        let mined = formula_search(&cfg.search, &data, &domain)?;
        if mined.is_empty() {
            iterations.push(IterationRecord {
                index,
                violations,
                points,
                rate,
                mined: None,
                wall: started.elapsed(),
            });
            break SynthesisOutcome::NoGain;
        }
        let counts = confusion_counts(&mined.formula(), &data)?;
        iterations.push(IterationRecord {
            index,
            violations,
            points,
            rate,
            mined: Some(MinedFormula {
                cause: mined.clone(),
                true_positives: counts.true_positives,
                false_positives: counts.false_positives,
            }),
            wall: started.elapsed(),
        });
        psi.extend_dedup(&mined);
        data = run_closed_loop(
            plant,
            labeler,
            &psi,
            cfg.traces,
            cfg.trace_len,
            derive_seed(cfg.seed, "iteration", index as u64),
            cfg.fallback,
        )?;
        index += 1;
    };

    let final_rate = data.violation_rate();
    Ok((
        psi,
        SynthesisRun {
            bound: cfg.bound,
            iterations,
            outcome,
            final_rate,
        },
    ))
}
