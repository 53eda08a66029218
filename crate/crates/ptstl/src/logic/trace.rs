//! Finite traces `(x_0, u_0), ..., (x_N, u_N)` and finite control spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("trace must contain at least one sample")]
    Empty,
    #[error("sample {index} has state dimension {found}, expected {expected}")]
    StateDim {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("sample {index} has control dimension {found}, expected {expected}")]
    ControlDim {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("control space dimension {0} has no values")]
    EmptyControlSet(usize),
    #[error("control value {value} at sample {index}, dimension {dim} is not in the control space")]
    ValueNotInSpace {
        index: usize,
        dim: usize,
        value: f64,
    },
    #[error("non-finite number at sample {index}")]
    NonFinite { index: usize },
}

/// One time step of a trace: the state vector and the control applied at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: Vec<f64>,
    pub control: Vec<f64>,
}

impl Sample {
    pub fn new(state: Vec<f64>, control: Vec<f64>) -> Self {
        Sample { state, control }
    }
}

/// A length-`N+1` sequence of `(x_k, u_k)` samples with homogeneous
/// dimensions. Immutable once built (aside from `push` during construction).
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    n: usize,
    m: usize,
    samples: Vec<Sample>,
}

impl Trace {
    /// An empty trace to be filled with `push`. Note that an empty trace is
    /// not a valid evaluation subject; callers must push at least one sample.
    pub fn new(n: usize, m: usize) -> Self {
        Trace {
            n,
            m,
            samples: Vec::new(),
        }
    }

    /// Builds a trace from samples, inferring dimensions from the first.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self, TraceError> {
        let first = samples.first().ok_or(TraceError::Empty)?;
        let (n, m) = (first.state.len(), first.control.len());
        for (index, s) in samples.iter().enumerate() {
            if s.state.len() != n {
                return Err(TraceError::StateDim {
                    index,
                    expected: n,
                    found: s.state.len(),
                });
            }
            if s.control.len() != m {
                return Err(TraceError::ControlDim {
                    index,
                    expected: m,
                    found: s.control.len(),
                });
            }
            if s.state.iter().chain(&s.control).any(|v| !v.is_finite()) {
                return Err(TraceError::NonFinite { index });
            }
        }
        Ok(Trace { n, m, samples })
    }

    pub fn push(&mut self, state: Vec<f64>, control: Vec<f64>) -> Result<(), TraceError> {
        let index = self.samples.len();
        if state.len() != self.n {
            return Err(TraceError::StateDim {
                index,
                expected: self.n,
                found: state.len(),
            });
        }
        if control.len() != self.m {
            return Err(TraceError::ControlDim {
                index,
                expected: self.m,
                found: control.len(),
            });
        }
        self.samples.push(Sample::new(state, control));
        Ok(())
    }

    /// Number of samples, i.e. `N + 1`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The last time index `N`. Panics on an empty trace.
    pub fn last_index(&self) -> usize {
        assert!(!self.samples.is_empty(), "empty trace has no last index");
        self.samples.len() - 1
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn control_dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn state(&self, k: usize, var: usize) -> f64 {
        self.samples[k].state[var]
    }

    #[inline]
    pub fn control(&self, k: usize, var: usize) -> f64 {
        self.samples[k].control[var]
    }

    pub fn sample(&self, k: usize) -> &Sample {
        &self.samples[k]
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }
}

/// Per-dimension finite control value sets `U^0 x ... x U^{m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSpace {
    sets: Vec<Vec<f64>>,
}

impl ControlSpace {
    pub fn new(sets: Vec<Vec<f64>>) -> Result<Self, TraceError> {
        for (j, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(TraceError::EmptyControlSet(j));
            }
        }
        Ok(ControlSpace { sets })
    }

    pub fn dims(&self) -> usize {
        self.sets.len()
    }

    pub fn values(&self, dim: usize) -> &[f64] {
        &self.sets[dim]
    }

    pub fn sets(&self) -> &[Vec<f64>] {
        &self.sets
    }

    /// Size of the product set `|U|`.
    pub fn size(&self) -> usize {
        self.sets.iter().map(Vec::len).product()
    }

    /// Control values are compared exactly; values come from finite declared
    /// sets, so representability is the config author's responsibility.
    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.sets.len()
            && u.iter()
                .zip(&self.sets)
                .all(|(v, set)| set.iter().any(|c| c == v))
    }

    /// Enumerates the full product set in lexicographic order of per-dimension
    /// value indices (dimension 0 varies slowest).
    pub fn combos(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for set in &self.sets {
            let mut next = Vec::with_capacity(out.len() * set.len());
            for prefix in &out {
                for v in set {
                    let mut combo = prefix.clone();
                    combo.push(*v);
                    next.push(combo);
                }
            }
            out = next;
        }
        out
    }
}
