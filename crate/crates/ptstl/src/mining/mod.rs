//! Scoring ptSTL formulas as per-time-step binary classifiers over labeled
//! datasets, and searching for the best combined cause formula of the
//! controllable shape `(G-[1,b] u_j = c) & (F-[1,1] φ)`.

mod cause;
mod data;
mod domain;
mod search;
mod templates;

pub use cause::{CauseClause, CombinedCause};
pub use data::{confusion_counts, ConfusionCounts, Dataset, LabeledTrace};
pub use domain::{ParameterDomain, SearchParams};
pub use search::{formula_search, optimize_parameters, score_cause, ScoredClause};
pub use templates::{enumerate_templates, ClauseTemplate};

use thiserror::Error;

use crate::logic::{FormulaError, TraceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiningError {
    #[error("labels ({labels}) and trace ({samples}) lengths differ")]
    LabelLength { labels: usize, samples: usize },
    #[error("trace {index} has dimensions ({n},{m}), dataset expects ({expected_n},{expected_m})")]
    InhomogeneousTrace {
        index: usize,
        n: usize,
        m: usize,
        expected_n: usize,
        expected_m: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("trace {index} (last index {last}) is shorter than the formula length {len}")]
    TraceTooShort {
        index: usize,
        last: usize,
        len: u32,
    },
    #[error("formula does not fit the dataset dimensions: {0}")]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("search parameters: oc_min {oc_min} exceeds oc_max {oc_max}")]
    OcBounds { oc_min: u32, oc_max: u32 },
    #[error("search parameters: beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("search parameters: min_gain must be non-negative, got {0}")]
    BadMinGain(f64),
    #[error("cause clause bound must be at least 1")]
    BadClauseBound,
    #[error("parameter domain: empty grid for {0}")]
    EmptyGrid(String),
    #[error("parameter domain covers {found} state variables, dataset has {expected}")]
    DomainMismatch { found: usize, expected: usize },
}
