//! Grid-search parameter optimization and greedy growth of the combined
//! cause formula.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::logic::{SlotKind, SlotValue, Valuation};

use super::templates::{enumerate_templates, ClauseTemplate};
use super::{
    confusion_counts, CauseClause, CombinedCause, ConfusionCounts, Dataset, MiningError,
    ParameterDomain, SearchParams,
};

/// A candidate clause with the counts and F_β score of `current | clause`
/// on the dataset it was optimized against.
#[derive(Debug, Clone)]
pub struct ScoredClause {
    pub clause: CauseClause,
    pub counts: ConfusionCounts,
    pub score: f64,
    canonical: String,
}

impl ScoredClause {
    /// Tie-break order: higher score, then more true positives, then a
    /// smaller bound `b`, then the lexicographically smaller canonical
    /// string. Total, so parallel reduction is order-independent.
    fn beats(&self, other: &ScoredClause) -> bool {
        if self.score != other.score {
            return self.score > other.score;
        }
        if self.counts.true_positives != other.counts.true_positives {
            return self.counts.true_positives > other.counts.true_positives;
        }
        if self.clause.bound() != other.clause.bound() {
            return self.clause.bound() < other.clause.bound();
        }
        self.canonical < other.canonical
    }
}

/// Scores a combined cause as a classifier: `(counts, F_β)` of its formula.
pub fn score_cause(
    cause: &CombinedCause,
    data: &Dataset,
    beta: f64,
) -> Result<(ConfusionCounts, f64), MiningError> {
    let counts = confusion_counts(&cause.formula(), data)?;
    let score = counts.f_beta(beta);
    Ok((counts, score))
}

/// Cached per-trace satisfaction of the growing formula, so each candidate
/// only pays for its own clause. The cached values come from the reference
/// evaluator; the per-clause fast path below must agree with it exactly
/// (checked by the oracle test suites).
struct ScoreContext<'a> {
    data: &'a Dataset,
    psi_sat: Vec<Vec<bool>>,
    psi_len: u32,
    existing: HashSet<String>,
}

impl<'a> ScoreContext<'a> {
    fn new(data: &'a Dataset, current: &CombinedCause) -> Result<Self, MiningError> {
        let psi = current.formula();
        psi.check_vars(data.state_dim(), data.control_dim())?;
        let psi_sat = data
            .traces()
            .iter()
            .map(|lt| psi.satisfaction(&lt.trace))
            .collect();
        Ok(ScoreContext {
            data,
            psi_sat,
            psi_len: current.length(),
            existing: current
                .clauses()
                .iter()
                .map(CauseClause::canonical)
                .collect(),
        })
    }

    /// Satisfaction run lengths for the scaffold `u_j = c`: `runs[k]` is the
    /// number of consecutive samples ending at `k-1` with `u_j == c`.
    fn control_runs(&self, signal: usize, value: f64) -> Vec<Vec<u32>> {
        self.data
            .traces()
            .iter()
            .map(|lt| {
                let len = lt.trace.len();
                let mut runs = vec![0u32; len];
                for k in 1..len {
                    runs[k] = if lt.trace.control(k - 1, signal) == value {
                        runs[k - 1] + 1
                    } else {
                        0
                    };
                }
                runs
            })
            .collect()
    }

    /// Counts of `psi | clause` where the clause is given by its scaffold
    /// run table, bound, and general-part satisfaction vectors. Returns
    /// `None` when some trace is shorter than the combined formula length.
    fn tally(
        &self,
        runs: &[Vec<u32>],
        bound: u32,
        general_len: u32,
        general_sat: &[Vec<bool>],
    ) -> Option<ConfusionCounts> {
        let clause_len = bound.max(1 + general_len);
        let start = self.psi_len.max(clause_len) as usize;
        let mut counts = ConfusionCounts::default();
        for ((lt, psi), (run, gv)) in self
            .data
            .traces()
            .iter()
            .zip(&self.psi_sat)
            .zip(runs.iter().zip(general_sat))
        {
            if start > lt.trace.last_index() {
                return None;
            }
            for i in start..lt.trace.len() {
                let window = bound.min(i as u32);
                let clause_ok = run[i] >= window && gv[i - 1];
                counts.tally(psi[i] || clause_ok, lt.labels[i]);
            }
        }
        Some(counts)
    }
}

/// Exhaustive grid search over one template's valuations, scoring each
/// candidate by the F_β of `current | candidate`. Ties break toward higher
/// tp, smaller `b`, then canonical-string order.
pub fn optimize_parameters(
    template: &ClauseTemplate,
    domain: &ParameterDomain,
    data: &Dataset,
    current: &CombinedCause,
    beta: f64,
) -> Result<Option<ScoredClause>, MiningError> {
    check_template_slots(template, domain)?;
    let ctx = ScoreContext::new(data, current)?;
    Ok(optimize_in_ctx(template, domain, &ctx, beta))
}

fn check_template_slots(
    template: &ClauseTemplate,
    domain: &ParameterDomain,
) -> Result<(), MiningError> {
    for slot in template.slots() {
        match slot.kind {
            SlotKind::StateThreshold { var } if var >= domain.state_dim() => {
                return Err(MiningError::DomainMismatch {
                    found: domain.state_dim(),
                    expected: var + 1,
                });
            }
            SlotKind::ControlValue { var } if var >= domain.control_dim() => {
                return Err(MiningError::DomainMismatch {
                    found: domain.control_dim(),
                    expected: var + 1,
                });
            }
            _ => {}
        }
    }
    Ok(())
}

fn slot_values(slot: &SlotKind, domain: &ParameterDomain) -> Vec<SlotValue> {
    match slot {
        SlotKind::StateThreshold { var } => domain
            .state_grid(*var)
            .iter()
            .map(|&v| SlotValue::Real(v))
            .collect(),
        SlotKind::ControlValue { var } => domain
            .control_grid(*var)
            .iter()
            .map(|&v| SlotValue::Real(v))
            .collect(),
        SlotKind::TimeBound => domain
            .inner_bounds()
            .iter()
            .map(|&t| SlotValue::Time(t))
            .collect(),
    }
}

fn optimize_in_ctx(
    template: &ClauseTemplate,
    domain: &ParameterDomain,
    ctx: &ScoreContext<'_>,
    beta: f64,
) -> Option<ScoredClause> {
    let runs = ctx.control_runs(template.signal(), template.value());
    let grids: Vec<(String, Vec<SlotValue>)> = template
        .slots()
        .iter()
        .map(|s| (s.name.clone(), slot_values(&s.kind, domain)))
        .collect();

    let mut best: Option<ScoredClause> = None;
    let mut odometer = vec![0usize; grids.len()];
    loop {
        let mut valuation = Valuation::new();
        for (slot_idx, (name, values)) in grids.iter().enumerate() {
            valuation = valuation.set(name.clone(), values[odometer[slot_idx]]);
        }
        // One general instantiation serves every bound in the grid.
        if let Ok(probe) = template.instantiate(1, &valuation) {
            let general_len = probe.general().length();
            let general_sat: Vec<Vec<bool>> = ctx
                .data
                .traces()
                .iter()
                .map(|lt| probe.general().satisfaction(&lt.trace))
                .collect();
            for &bound in domain.clause_bounds() {
                let clause = CauseClause::new(
                    template.signal(),
                    template.value(),
                    bound,
                    probe.general().clone(),
                )
                .expect("clause bounds grid excludes 0");
                let canonical = clause.canonical();
                if ctx.existing.contains(&canonical) {
                    continue;
                }
                let Some(counts) = ctx.tally(&runs, bound, general_len, &general_sat) else {
                    continue;
                };
                let candidate = ScoredClause {
                    clause,
                    counts,
                    score: counts.f_beta(beta),
                    canonical,
                };
                if best.as_ref().is_none_or(|b| candidate.beats(b)) {
                    best = Some(candidate);
                }
            }
        }
        // Advance the odometer; done when it wraps.
        let mut slot_idx = grids.len();
        loop {
            if slot_idx == 0 {
                return best;
            }
            slot_idx -= 1;
            odometer[slot_idx] += 1;
            if odometer[slot_idx] < grids[slot_idx].1.len() {
                break;
            }
            odometer[slot_idx] = 0;
        }
    }
}

/// Greedy growth of the combined cause formula: repeatedly scan all
/// templates and valuations for the clause maximizing `F_β(Ψ | Φ)`, and
/// append it while the clause budget allows and the score gain over
/// `F_β(Ψ)` strictly exceeds `min_gain`. The result is deterministic for
/// fixed inputs regardless of scan parallelism.
pub fn formula_search(
    params: &SearchParams,
    data: &Dataset,
    domain: &ParameterDomain,
) -> Result<CombinedCause, MiningError> {
    if data.is_empty() {
        return Err(MiningError::EmptyDataset);
    }
    domain.check_against(data)?;
    let templates = enumerate_templates(
        data.state_dim(),
        data.control_dim(),
        data.control_space(),
        params,
    )?;
    let max_clauses = params.max_clauses.unwrap_or(usize::MAX);

    let mut psi = CombinedCause::empty();
    let mut current_score = 0.0;
    while psi.len() < max_clauses {
        let ctx = ScoreContext::new(data, &psi)?;
        let best = templates
            .par_iter()
            .filter_map(|t| optimize_in_ctx(t, domain, &ctx, params.beta))
            .reduce_with(|a, b| if b.beats(&a) { b } else { a });
        let Some(best) = best else {
            break;
        };
        if best.score - current_score > params.min_gain {
            current_score = best.score;
            psi.push_dedup(best.clause);
        } else {
            break;
        }
    }
    Ok(psi)
}
