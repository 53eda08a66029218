//! ptSTL abstract syntax, text grammar, and Boolean semantics over finite
//! traces of a discrete-time control system.
//!
//! Formulas and traces are immutable values; [`Formula::evaluate`] is pure
//! and safe to call concurrently on shared data.

mod formula;
mod parametric;
mod parse;
mod trace;

pub use formula::{Formula, FormulaError, Interval, Relation};
pub use parametric::{
    NumTerm, ParamInterval, ParametricFormula, SlotInfo, SlotKind, SlotValue, TimeTerm, Valuation,
};
pub use parse::{parse_formula, parse_parametric, ParseError};
pub use trace::{ControlSpace, Sample, Trace, TraceError};
