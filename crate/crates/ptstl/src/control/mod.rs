//! The cause-avoiding feedback controller and the iterative
//! mine–control–simulate refinement loop.

mod controller;
mod synthesis;

pub use controller::{check_guarantee, shift_clause, CauseController, FallbackMode};
pub use synthesis::{
    run_closed_loop, synthesize_iterative, DomainSpec, IterationRecord, MinedFormula,
    SynthesisConfig, SynthesisError, SynthesisOutcome, SynthesisRun,
};
