//! The feedback controller that steers away from a combined cause formula.
//!
//! At step `k` the controller tries candidate controls in a random order and
//! returns the first one under which no *shifted* clause holds on the
//! history extended with `(x_k, u)`. Falsifying the shifted clause at `k`
//! falsifies the clause itself at `k+1` for every successor sample, so the
//! closed loop avoids the cause one step ahead.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::logic::{ControlSpace, Formula, Sample, Trace};
use crate::mining::{CauseClause, CombinedCause};
use crate::plants::PlantError;
use crate::seed::rng_for;

/// `(G-[0,b-1] u_j = c) & general` — the one-step time shift of a clause.
/// Its truth at `k` is equivalent to the clause's truth at `k+1` on any
/// extension of the trace.
pub fn shift_clause(clause: &CauseClause) -> Formula {
    Formula::and(
        Formula::historically(
            Formula::control(clause.signal(), clause.value()),
            0,
            clause.bound() - 1,
        )
        .expect("bound >= 1"),
        clause.general().clone(),
    )
}

/// Sufficient condition under which the controller provably avoids the
/// cause: every clause has `b >= 2` and every control dimension offers at
/// least two values. An empty cause is vacuously avoided.
pub fn check_guarantee(cause: &CombinedCause, space: &ControlSpace) -> bool {
    if cause.is_empty() {
        return true;
    }
    cause.clauses().iter().all(|c| c.bound() >= 2)
        && (0..space.dims()).all(|j| space.values(j).len() >= 2)
}

/// What to do when every candidate control satisfies some shifted clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FallbackMode {
    /// A fresh uniform draw from the full control set.
    #[default]
    Uniform,
    /// The candidate satisfying the fewest shifted clauses.
    MinSatisfied,
}

/// Finite-memory feedback controller for a combined cause formula.
///
/// Holds the last `K - 1` samples where `K` is the cause's length; early in
/// a run the shorter prefix is evaluated directly under the clamp semantics.
#[derive(Debug, Clone)]
pub struct CauseController {
    shifted: Vec<Formula>,
    max_state_var: usize,
    max_control_var: usize,
    memory: VecDeque<Sample>,
    memory_cap: usize,
    rng: ChaCha8Rng,
    fallback: FallbackMode,
}

impl CauseController {
    pub fn new(cause: &CombinedCause, seed: u64) -> Self {
        let shifted: Vec<Formula> = cause.clauses().iter().map(shift_clause).collect();
        let max_state_var = cause
            .clauses()
            .iter()
            .map(|c| max_state_var(c.general()))
            .max()
            .flatten()
            .unwrap_or(0);
        let max_control_var = cause
            .clauses()
            .iter()
            .map(|c| {
                c.signal()
                    .max(max_control_var(c.general()).unwrap_or(0))
            })
            .max()
            .unwrap_or(0);
        let memory_cap = cause.length().saturating_sub(1) as usize;
        CauseController {
            shifted,
            max_state_var,
            max_control_var,
            memory: VecDeque::with_capacity(memory_cap + 1),
            memory_cap,
            rng: rng_for(seed, "controller", 0),
            fallback: FallbackMode::Uniform,
        }
    }

    pub fn with_fallback(mut self, fallback: FallbackMode) -> Self {
        self.fallback = fallback;
        self
    }

    /// Number of history samples currently held.
    pub fn memory_len(&self) -> usize {
        self.memory.len()
    }

    /// Picks `u_k` for the current state and pushes `(x_k, u_k)` into the
    /// controller memory.
    pub fn step(&mut self, x: &[f64], space: &ControlSpace) -> Result<Vec<f64>, PlantError> {
        if !self.shifted.is_empty() {
            if self.max_state_var >= x.len() {
                return Err(PlantError::StateDim {
                    expected: self.max_state_var + 1,
                    found: x.len(),
                });
            }
            if self.max_control_var >= space.dims() {
                return Err(PlantError::ControlDim {
                    expected: self.max_control_var + 1,
                    found: space.dims(),
                });
            }
        }

        let combos = space.combos();
        let mut order: Vec<usize> = (0..combos.len()).collect();
        order.shuffle(&mut self.rng);

        let mut chosen: Option<usize> = None;
        let mut least: Option<(usize, usize)> = None; // (satisfied count, combo index)
        if self.shifted.is_empty() {
            chosen = Some(order[0]);
        } else {
            let k = self.memory.len();
            let mut samples: Vec<Sample> = self.memory.iter().cloned().collect();
            samples.push(Sample::new(x.to_vec(), Vec::new()));
            for &idx in &order {
                samples[k].control = combos[idx].clone();
                let trace = Trace::from_samples(samples.clone()).expect("non-empty history");
                let satisfied = self
                    .shifted
                    .iter()
                    .filter(|phi| phi.evaluate(&trace, k))
                    .count();
                if satisfied == 0 {
                    chosen = Some(idx);
                    break;
                }
                if least.is_none_or(|(best, _)| satisfied < best) {
                    least = Some((satisfied, idx));
                }
            }
        }

        let idx = chosen.unwrap_or_else(|| match self.fallback {
            FallbackMode::Uniform => self.rng.gen_range(0..combos.len()),
            FallbackMode::MinSatisfied => least.expect("candidates were scanned").1,
        });
        let u = combos[idx].clone();
        self.memory.push_back(Sample::new(x.to_vec(), u.clone()));
        while self.memory.len() > self.memory_cap {
            self.memory.pop_front();
        }
        Ok(u)
    }
}

fn max_state_var(phi: &Formula) -> Option<usize> {
    match phi {
        Formula::True | Formula::False | Formula::Control { .. } => None,
        Formula::State { var, .. } => Some(*var),
        Formula::Not(c) | Formula::Once { child: c, .. } | Formula::Historically { child: c, .. } => {
            max_state_var(c)
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Since { left: l, right: r, .. } => {
            max_state_var(l).max(max_state_var(r))
        }
    }
}

fn max_control_var(phi: &Formula) -> Option<usize> {
    match phi {
        Formula::True | Formula::False | Formula::State { .. } => None,
        Formula::Control { var, .. } => Some(*var),
        Formula::Not(c) | Formula::Once { child: c, .. } | Formula::Historically { child: c, .. } => {
            max_control_var(c)
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Since { left: l, right: r, .. } => {
            max_control_var(l).max(max_control_var(r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Relation;

    fn example_clause() -> CauseClause {
        // (G-[1,1] u0 = 0) & (F-[1,1] x3 > 10)
        CauseClause::new(0, 0.0, 1, Formula::state(3, Relation::Gt, 10.0)).unwrap()
    }

    #[test]
    fn shift_drops_one_step() {
        let shifted = shift_clause(&example_clause());
        assert_eq!(shifted.to_string(), "(G-[0,0] u0 = 0 & x3 > 10)");
        let b2 = CauseClause::new(0, 0.0, 2, Formula::state(3, Relation::Gt, 10.0)).unwrap();
        assert_eq!(shift_clause(&b2).to_string(), "(G-[0,1] u0 = 0 & x3 > 10)");
        let trivial = CauseClause::new(1, 1.0, 3, Formula::True).unwrap();
        assert_eq!(shift_clause(&trivial).to_string(), "(G-[0,2] u1 = 1 & true)");
    }

    #[test]
    fn guarantee_conditions() {
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        let all_b2 = CombinedCause::from_clauses(vec![CauseClause::new(
            0,
            0.0,
            2,
            Formula::state(3, Relation::Gt, 10.0),
        )
        .unwrap()]);
        assert!(check_guarantee(&all_b2, &space));
        let has_b1 = CombinedCause::from_clauses(vec![example_clause()]);
        assert!(!check_guarantee(&has_b1, &space));
        let singleton = ControlSpace::new(vec![vec![0.0]]).unwrap();
        assert!(!check_guarantee(&all_b2, &singleton));
        assert!(check_guarantee(&CombinedCause::empty(), &singleton));
    }

    #[test]
    fn controller_forced_to_flip_signal() {
        // Psi = (G-[1,1] u0 = 0) & (F-[1,1] x3 > 10); with x3 = 12 now, the
        // shifted clause holds for u0 = 0, so the controller must pick u0 = 1.
        let cause = CombinedCause::from_clauses(vec![example_clause()]);
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        for seed in 0..20 {
            let mut ctrl = CauseController::new(&cause, seed);
            let u = ctrl.step(&[0.0, 0.0, 0.0, 12.0], &space).unwrap();
            assert_eq!(u, vec![1.0]);
        }
    }

    #[test]
    fn controller_free_when_general_is_false() {
        let cause = CombinedCause::from_clauses(vec![example_clause()]);
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        let mut seen = [false, false];
        for seed in 0..40 {
            let mut ctrl = CauseController::new(&cause, seed);
            let u = ctrl.step(&[0.0, 0.0, 0.0, 5.0], &space).unwrap();
            seen[u[0] as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn exhausted_candidates_fall_back_to_uniform() {
        // Two clauses excluding both control values whenever x0 > 0.
        let clauses = vec![
            CauseClause::new(0, 0.0, 1, Formula::state(0, Relation::Gt, 0.0)).unwrap(),
            CauseClause::new(0, 1.0, 1, Formula::state(0, Relation::Gt, 0.0)).unwrap(),
        ];
        let cause = CombinedCause::from_clauses(clauses);
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        let mut seen = [false, false];
        for seed in 0..40 {
            let mut ctrl = CauseController::new(&cause, seed);
            let u = ctrl.step(&[5.0], &space).unwrap();
            assert!(space.contains(&u));
            seen[u[0] as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn min_satisfied_fallback_picks_least_violating() {
        // Clause A excludes u0 = 0 (x0 > 0), clauses B and C both exclude
        // u0 = 1, so u0 = 0 satisfies one shifted clause and u0 = 1 two.
        let clauses = vec![
            CauseClause::new(0, 0.0, 1, Formula::state(0, Relation::Gt, 0.0)).unwrap(),
            CauseClause::new(0, 1.0, 1, Formula::state(0, Relation::Gt, 0.0)).unwrap(),
            CauseClause::new(0, 1.0, 1, Formula::state(0, Relation::Gt, 1.0)).unwrap(),
        ];
        let cause = CombinedCause::from_clauses(clauses);
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        for seed in 0..20 {
            let mut ctrl =
                CauseController::new(&cause, seed).with_fallback(FallbackMode::MinSatisfied);
            let u = ctrl.step(&[5.0], &space).unwrap();
            assert_eq!(u, vec![0.0]);
        }
    }

    #[test]
    fn memory_stays_at_cause_length_minus_one() {
        let clause = CauseClause::new(
            0,
            0.0,
            3,
            Formula::once(Formula::state(0, Relation::Gt, 1.0), 1, 2).unwrap(),
        )
        .unwrap();
        let cause = CombinedCause::from_clauses(vec![clause]);
        assert_eq!(cause.length(), 3);
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        let mut ctrl = CauseController::new(&cause, 5);
        for k in 0..6 {
            ctrl.step(&[k as f64], &space).unwrap();
            assert_eq!(ctrl.memory_len(), (k + 1).min(2));
        }
    }

    #[test]
    fn dimension_mismatch_reported() {
        let cause = CombinedCause::from_clauses(vec![example_clause()]);
        let space = ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap();
        let mut ctrl = CauseController::new(&cause, 0);
        // x3 is referenced but the state only has 2 components.
        assert!(matches!(
            ctrl.step(&[0.0, 0.0], &space),
            Err(PlantError::StateDim { .. })
        ));
    }
}
