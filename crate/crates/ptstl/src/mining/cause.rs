//! Controllable cause clauses `(G-[1,b] u_j = c) & (F-[1,1] φ)` and their
//! disjunction, the combined cause formula.

use std::fmt;

use crate::logic::Formula;

use super::MiningError;

/// One controllable cause: the control conjunct pins control dimension
/// `signal` to `value` over the past window `[1, bound]`, while the general
/// part holds one step back. A controller can falsify it one step ahead by
/// steering `u^signal` away from `value`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauseClause {
    signal: usize,
    value: f64,
    bound: u32,
    general: Formula,
}

impl CauseClause {
    pub fn new(
        signal: usize,
        value: f64,
        bound: u32,
        general: Formula,
    ) -> Result<Self, MiningError> {
        if bound < 1 {
            return Err(MiningError::BadClauseBound);
        }
        Ok(CauseClause {
            signal,
            value,
            bound,
            general,
        })
    }

    pub fn signal(&self) -> usize {
        self.signal
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn general(&self) -> &Formula {
        &self.general
    }

    /// The clause as a plain formula: `(G-[1,b] u_j = c) & (F-[1,1] general)`.
    pub fn formula(&self) -> Formula {
        Formula::and(
            Formula::historically(Formula::control(self.signal, self.value), 1, self.bound)
                .expect("bound >= 1"),
            Formula::once(self.general.clone(), 1, 1).expect("constant window"),
        )
    }

    /// `max(b, 1 + length(general))`.
    pub fn length(&self) -> u32 {
        self.bound.max(1 + self.general.length())
    }

    pub fn canonical(&self) -> String {
        self.formula().to_string()
    }
}

impl fmt::Display for CauseClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula())
    }
}

/// An ordered disjunction of cause clauses; the empty disjunction is `false`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CombinedCause {
    clauses: Vec<CauseClause>,
}

impl CombinedCause {
    pub fn empty() -> Self {
        CombinedCause::default()
    }

    pub fn from_clauses(clauses: Vec<CauseClause>) -> Self {
        CombinedCause { clauses }
    }

    pub fn clauses(&self) -> &[CauseClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Appends a clause unless a string-identical one is already present.
    /// Returns whether the clause was added.
    pub fn push_dedup(&mut self, clause: CauseClause) -> bool {
        let canon = clause.canonical();
        if self.clauses.iter().any(|c| c.canonical() == canon) {
            return false;
        }
        self.clauses.push(clause);
        true
    }

    /// Appends every clause of `other`, dropping duplicates.
    pub fn extend_dedup(&mut self, other: &CombinedCause) -> usize {
        other
            .clauses
            .iter()
            .filter(|c| self.push_dedup((*c).clone()))
            .count()
    }

    /// `Ψ = Φ_1 | ... | Φ_p` as a plain formula (`false` when empty).
    pub fn formula(&self) -> Formula {
        let mut iter = self.clauses.iter();
        let Some(first) = iter.next() else {
            return Formula::False;
        };
        iter.fold(first.formula(), |acc, clause| {
            Formula::or(acc, clause.formula())
        })
    }

    /// Memory requirement `K`: the max clause length, 0 when empty.
    pub fn length(&self) -> u32 {
        self.clauses.iter().map(CauseClause::length).max().unwrap_or(0)
    }
}

impl fmt::Display for CombinedCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula())
    }
}
