//! Labeled datasets and per-time-step classifier scoring.

use crate::logic::{ControlSpace, Formula, Trace};

use super::MiningError;

/// A trace with a per-time-step binary label; `true` marks an unwanted event.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    pub trace: Trace,
    pub labels: Vec<bool>,
}

impl LabeledTrace {
    pub fn new(trace: Trace, labels: Vec<bool>) -> Result<Self, MiningError> {
        if labels.len() != trace.len() {
            return Err(MiningError::LabelLength {
                labels: labels.len(),
                samples: trace.len(),
            });
        }
        Ok(LabeledTrace { trace, labels })
    }

    pub fn violations(&self) -> u64 {
        self.labels.iter().filter(|&&l| l).count() as u64
    }
}

/// A set of labeled traces with shared dimensions and control space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    m: usize,
    space: ControlSpace,
    traces: Vec<LabeledTrace>,
}

impl Dataset {
    /// May be empty (e.g. a zero-trace simulation); mining requires at least
    /// one trace and errors otherwise.
    pub fn new(
        n: usize,
        m: usize,
        space: ControlSpace,
        traces: Vec<LabeledTrace>,
    ) -> Result<Self, MiningError> {
        for (index, lt) in traces.iter().enumerate() {
            if lt.trace.state_dim() != n || lt.trace.control_dim() != m {
                return Err(MiningError::InhomogeneousTrace {
                    index,
                    n: lt.trace.state_dim(),
                    m: lt.trace.control_dim(),
                    expected_n: n,
                    expected_m: m,
                });
            }
        }
        Ok(Dataset {
            n,
            m,
            space,
            traces,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn control_dim(&self) -> usize {
        self.m
    }

    pub fn control_space(&self) -> &ControlSpace {
        &self.space
    }

    pub fn traces(&self) -> &[LabeledTrace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Total number of samples across all traces.
    pub fn total_points(&self) -> u64 {
        self.traces.iter().map(|t| t.trace.len() as u64).sum()
    }

    /// Total number of label-1 time steps (the violation count `V`).
    pub fn violations(&self) -> u64 {
        self.traces.iter().map(LabeledTrace::violations).sum()
    }

    /// The refinement loop's stop-test rate: labels summed over indices
    /// `1..=N` of each trace, divided by `N * |D|`. Requires every trace to
    /// have at least two samples.
    pub fn violation_rate(&self) -> f64 {
        let mut sum = 0u64;
        let mut denom = 0u64;
        for lt in &self.traces {
            sum += lt.labels.iter().skip(1).filter(|&&l| l).count() as u64;
            denom += (lt.trace.len() - 1) as u64;
        }
        if denom == 0 {
            0.0
        } else {
            sum as f64 / denom as f64
        }
    }

    /// Per-state-variable observed `(min, max)` ranges, or `None` for an
    /// empty dataset.
    pub fn state_ranges(&self) -> Option<Vec<(f64, f64)>> {
        if self.traces.is_empty() {
            return None;
        }
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.n];
        for lt in &self.traces {
            for sample in lt.trace.samples() {
                for (i, v) in sample.state.iter().enumerate() {
                    ranges[i].0 = ranges[i].0.min(*v);
                    ranges[i].1 = ranges[i].1.max(*v);
                }
            }
        }
        Some(ranges)
    }
}

/// Classifier tallies over the scored index range of a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    #[inline]
    pub fn tally(&mut self, predicted: bool, label: bool) {
        match (predicted, label) {
            (true, true) => self.true_positives += 1,
            (true, false) => self.false_positives += 1,
            (false, true) => self.false_negatives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }

    /// `F_β = (1+β²)·precision·recall / (β²·precision + recall)`, with 0 for
    /// the degenerate `tp = 0` case. Larger β emphasizes recall, smaller β
    /// precision.
    pub fn f_beta(&self, beta: f64) -> f64 {
        let tp = self.true_positives as f64;
        if self.true_positives == 0 {
            return 0.0;
        }
        let precision = tp / (tp + self.false_positives as f64);
        let recall = tp / (tp + self.false_negatives as f64);
        let b2 = beta * beta;
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    }
}

/// Scores `phi` as a classifier on `data` per the trace-fragment convention:
/// with `M = length(phi)`, each trace index `i` from `M` to `N` is classified
/// positive iff `(trace, i) |= phi` and tallied against the label `l_i`.
pub fn confusion_counts(phi: &Formula, data: &Dataset) -> Result<ConfusionCounts, MiningError> {
    phi.check_vars(data.state_dim(), data.control_dim())?;
    let m = phi.length();
    for (index, lt) in data.traces().iter().enumerate() {
        if (lt.trace.last_index() as u32) < m {
            return Err(MiningError::TraceTooShort {
                index,
                last: lt.trace.last_index(),
                len: m,
            });
        }
    }
    let mut counts = ConfusionCounts::default();
    for lt in data.traces() {
        for i in m as usize..lt.trace.len() {
            counts.tally(phi.evaluate(&lt.trace, i), lt.labels[i]);
        }
    }
    Ok(counts)
}
