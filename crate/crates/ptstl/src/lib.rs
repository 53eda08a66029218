//! Past-time signal temporal logic (ptSTL) over discrete-time control traces,
//! specification mining of *controllable causes*, and synthesis of feedback
//! controllers that avoid the mined causes.
//!
//! The crate is organized around a simple pipeline:
//!
//! 1. [`plants`] — simulatable systems `x_{k+1} = f(x_k, u_k, w_k)` with a
//!    per-step labeler marking unwanted events.
//! 2. [`logic`] — ptSTL syntax, text grammar, and Boolean semantics over
//!    finite traces.
//! 3. [`mining`] — scoring ptSTL formulas as per-step binary classifiers
//!    (F_β over a labeled dataset) and searching for the best combined
//!    cause formula `Ψ = Φ_1 | ... | Φ_p` where each clause has the
//!    controllable shape `(G-[1,b] u_j = c) & (F-[1,1] φ)`.
//! 4. [`control`] — the cause-avoiding feedback controller and the
//!    iterative mine–control–simulate refinement loop.
//! 5. [`io`] — dataset files, run configuration, result tables, heatmaps.
//!
//! All randomness flows from a single root seed through [`seed::derive_seed`],
//! so every stage is replayable in isolation.

pub mod control;
pub mod io;
pub mod logic;
pub mod mining;
pub mod plants;
pub mod seed;

pub use logic::{Formula, ParametricFormula, Trace, ControlSpace};
pub use mining::{CauseClause, CombinedCause, Dataset, LabeledTrace, SearchParams};
