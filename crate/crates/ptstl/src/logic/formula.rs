//! Concrete ptSTL formulas and their Boolean semantics.

use std::fmt;

use thiserror::Error;

use super::trace::Trace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("malformed interval [{lo},{hi}]: lo exceeds hi")]
    BadInterval { lo: u32, hi: u32 },
    #[error("state variable x{var} out of range (state dimension is {n})")]
    StateVarOutOfRange { var: usize, n: usize },
    #[error("control variable u{var} out of range (control dimension is {m})")]
    ControlVarOutOfRange { var: usize, m: usize },
    #[error("duplicate parameter slot `{0}`")]
    DuplicateSlot(String),
    #[error("valuation is missing parameter slot `{0}`")]
    MissingSlot(String),
    #[error("valuation names `{0}`, which is not a slot of the formula")]
    UnknownSlot(String),
    #[error("slot `{name}` expects a {expected} value")]
    SlotKindMismatch { name: String, expected: &'static str },
    #[error("formula is parametric; instantiate its slots first")]
    HasSlots,
}

/// Comparison relation of a state atom. Controls use equality only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Gt,
}

impl Relation {
    #[inline]
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Lt => value < threshold,
            Relation::Gt => value > threshold,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Relation::Lt => '<',
            Relation::Gt => '>',
        }
    }
}

/// A bounded past-time window `[lo, hi]` in discrete steps, `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: u32,
    hi: u32,
}

impl Interval {
    pub fn new(lo: u32, hi: u32) -> Result<Self, FormulaError> {
        if lo > hi {
            return Err(FormulaError::BadInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// A ptSTL formula over the state variables `x0..x{n-1}` and control
/// variables `u0..u{m-1}` of a discrete-time system.
///
/// `Once` is the past-eventually operator `F-[a,b]` (`true S[a,b] φ`) and
/// `Historically` is the past-globally operator `G-[a,b]` (`!F-[a,b] !φ`);
/// the evaluator treats both as exactly those expansions.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    State {
        var: usize,
        rel: Relation,
        threshold: f64,
    },
    Control {
        var: usize,
        value: f64,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Since {
        left: Box<Formula>,
        right: Box<Formula>,
        window: Interval,
    },
    Once {
        child: Box<Formula>,
        window: Interval,
    },
    Historically {
        child: Box<Formula>,
        window: Interval,
    },
}

impl Formula {
    pub fn state(var: usize, rel: Relation, threshold: f64) -> Self {
        Formula::State {
            var,
            rel,
            threshold,
        }
    }

    pub fn control(var: usize, value: f64) -> Self {
        Formula::Control { var, value }
    }

    pub fn not(child: Formula) -> Self {
        Formula::Not(Box::new(child))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn since(left: Formula, right: Formula, lo: u32, hi: u32) -> Result<Self, FormulaError> {
        Ok(Formula::Since {
            left: Box::new(left),
            right: Box::new(right),
            window: Interval::new(lo, hi)?,
        })
    }

    pub fn once(child: Formula, lo: u32, hi: u32) -> Result<Self, FormulaError> {
        Ok(Formula::Once {
            child: Box::new(child),
            window: Interval::new(lo, hi)?,
        })
    }

    pub fn historically(child: Formula, lo: u32, hi: u32) -> Result<Self, FormulaError> {
        Ok(Formula::Historically {
            child: Box::new(child),
            window: Interval::new(lo, hi)?,
        })
    }

    /// `(trace, k) |= φ` under the ptSTL semantics.
    ///
    /// `Since` requires a witness `j in [k-hi, k-lo] ∩ [0, k]` with the right
    /// child true at `j` and the left child true at every `l in [j, k]`. An
    /// empty candidate window makes `Since`/`Once` false and `Historically`
    /// true, so evaluation is well-defined at every `k`, including early
    /// indices `k < length(φ)`.
    ///
    /// Panics if `k` is out of range or a variable index exceeds the trace
    /// dimensions; use [`Formula::check_vars`] to validate at a boundary.
    pub fn evaluate(&self, trace: &Trace, k: usize) -> bool {
        assert!(
            k < trace.len(),
            "evaluation index {k} out of range for trace of length {}",
            trace.len()
        );
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::State {
                var,
                rel,
                threshold,
            } => rel.holds(trace.state(k, *var), *threshold),
            Formula::Control { var, value } => trace.control(k, *var) == *value,
            Formula::Not(child) => !child.evaluate(trace, k),
            Formula::And(left, right) => left.evaluate(trace, k) && right.evaluate(trace, k),
            Formula::Or(left, right) => left.evaluate(trace, k) || right.evaluate(trace, k),
            Formula::Since {
                left,
                right,
                window,
            } => match past_window(k, window) {
                None => false,
                Some((j_lo, j_hi)) => {
                    // Scan candidate witnesses newest-first so the run check
                    // for the left child extends incrementally.
                    let mut run_ok = true;
                    for l in (j_hi..=k).rev() {
                        if !left.evaluate(trace, l) {
                            run_ok = false;
                            break;
                        }
                    }
                    if run_ok && right.evaluate(trace, j_hi) {
                        return true;
                    }
                    let mut j = j_hi;
                    while run_ok && j > j_lo {
                        j -= 1;
                        run_ok = left.evaluate(trace, j);
                        if run_ok && right.evaluate(trace, j) {
                            return true;
                        }
                    }
                    false
                }
            },
            Formula::Once { child, window } => match past_window(k, window) {
                None => false,
                Some((j_lo, j_hi)) => (j_lo..=j_hi).any(|j| child.evaluate(trace, j)),
            },
            Formula::Historically { child, window } => match past_window(k, window) {
                None => true,
                Some((j_lo, j_hi)) => (j_lo..=j_hi).all(|j| child.evaluate(trace, j)),
            },
        }
    }

    /// Satisfaction at every index of the trace, computed bottom-up with one
    /// table per subformula. Equivalent to calling [`Formula::evaluate`] at
    /// each `k`, but linear in the trace length per node instead of
    /// re-evaluating children per witness, so deeply nested `Since` stays
    /// cheap.
    pub fn satisfaction(&self, trace: &Trace) -> Vec<bool> {
        let len = trace.len();
        match self {
            Formula::True => vec![true; len],
            Formula::False => vec![false; len],
            Formula::State {
                var,
                rel,
                threshold,
            } => (0..len)
                .map(|k| rel.holds(trace.state(k, *var), *threshold))
                .collect(),
            Formula::Control { var, value } => {
                (0..len).map(|k| trace.control(k, *var) == *value).collect()
            }
            Formula::Not(child) => {
                let mut sat = child.satisfaction(trace);
                for v in &mut sat {
                    *v = !*v;
                }
                sat
            }
            Formula::And(left, right) => {
                let mut sat = left.satisfaction(trace);
                for (v, r) in sat.iter_mut().zip(right.satisfaction(trace)) {
                    *v = *v && r;
                }
                sat
            }
            Formula::Or(left, right) => {
                let mut sat = left.satisfaction(trace);
                for (v, r) in sat.iter_mut().zip(right.satisfaction(trace)) {
                    *v = *v || r;
                }
                sat
            }
            Formula::Since {
                left,
                right,
                window,
            } => {
                let ls = left.satisfaction(trace);
                let rs = right.satisfaction(trace);
                // runs[k]: length of the maximal left-true run ending at k,
                // so the left child holds on [k + 1 - runs[k], k].
                let mut runs = vec![0usize; len];
                for k in 0..len {
                    runs[k] = if ls[k] {
                        if k > 0 {
                            runs[k - 1] + 1
                        } else {
                            1
                        }
                    } else {
                        0
                    };
                }
                (0..len)
                    .map(|k| match past_window(k, window) {
                        None => false,
                        Some((j_lo, j_hi)) => {
                            let reach = k + 1 - runs[k];
                            (j_lo.max(reach)..=j_hi).any(|j| rs[j])
                        }
                    })
                    .collect()
            }
            Formula::Once { child, window } => {
                let cs = child.satisfaction(trace);
                (0..len)
                    .map(|k| match past_window(k, window) {
                        None => false,
                        Some((j_lo, j_hi)) => cs[j_lo..=j_hi].iter().any(|&v| v),
                    })
                    .collect()
            }
            Formula::Historically { child, window } => {
                let cs = child.satisfaction(trace);
                (0..len)
                    .map(|k| match past_window(k, window) {
                        None => true,
                        Some((j_lo, j_hi)) => cs[j_lo..=j_hi].iter().all(|&v| v),
                    })
                    .collect()
            }
        }
    }

    /// The oldest relative time index the formula can reference: atoms are 0,
    /// negation preserves, conjunction takes the max, and temporal operators
    /// add their window's upper bound to the max of their children.
    pub fn length(&self) -> u32 {
        match self {
            Formula::True | Formula::False | Formula::State { .. } | Formula::Control { .. } => 0,
            Formula::Not(child) => child.length(),
            Formula::And(left, right) | Formula::Or(left, right) => {
                left.length().max(right.length())
            }
            Formula::Since {
                left,
                right,
                window,
            } => window.hi() + left.length().max(right.length()),
            Formula::Once { child, window } | Formula::Historically { child, window } => {
                window.hi() + child.length()
            }
        }
    }

    /// Total number of Boolean and temporal operator nodes; atoms and
    /// constants count zero.
    pub fn operator_count(&self) -> u32 {
        match self {
            Formula::True | Formula::False | Formula::State { .. } | Formula::Control { .. } => 0,
            Formula::Not(child) => 1 + child.operator_count(),
            Formula::And(left, right) | Formula::Or(left, right) => {
                1 + left.operator_count() + right.operator_count()
            }
            Formula::Since { left, right, .. } => {
                1 + left.operator_count() + right.operator_count()
            }
            Formula::Once { child, .. } | Formula::Historically { child, .. } => {
                1 + child.operator_count()
            }
        }
    }

    /// Validates that every variable index fits a system with `n` state and
    /// `m` control dimensions.
    pub fn check_vars(&self, n: usize, m: usize) -> Result<(), FormulaError> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::State { var, .. } => {
                if *var < n {
                    Ok(())
                } else {
                    Err(FormulaError::StateVarOutOfRange { var: *var, n })
                }
            }
            Formula::Control { var, .. } => {
                if *var < m {
                    Ok(())
                } else {
                    Err(FormulaError::ControlVarOutOfRange { var: *var, m })
                }
            }
            Formula::Not(child)
            | Formula::Once { child, .. }
            | Formula::Historically { child, .. } => child.check_vars(n, m),
            Formula::And(left, right)
            | Formula::Or(left, right)
            | Formula::Since { left, right, .. } => {
                left.check_vars(n, m)?;
                right.check_vars(n, m)
            }
        }
    }

}

/// Candidate witness indices `[k-hi, k-lo] ∩ [0, k]`, or `None` when empty.
#[inline]
fn past_window(k: usize, window: &Interval) -> Option<(usize, usize)> {
    let lo = window.lo() as usize;
    if k < lo {
        return None;
    }
    Some((k.saturating_sub(window.hi() as usize), k - lo))
}

/// Canonical number formatting: shortest decimal that round-trips.
pub(crate) fn fmt_number(f: &mut fmt::Formatter<'_>, value: f64) -> fmt::Result {
    write!(f, "{value}")
}

impl fmt::Display for Formula {
    /// Canonical, fully parenthesized text form: binary nodes print as
    /// `(left op right)`, unary operators parenthesize composite operands.
    /// `format` is the inverse of `parse` on canonical strings.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::State {
                var,
                rel,
                threshold,
            } => {
                write!(f, "x{var} {} ", rel.symbol())?;
                fmt_number(f, *threshold)
            }
            Formula::Control { var, value } => {
                write!(f, "u{var} = ")?;
                fmt_number(f, *value)
            }
            Formula::Not(child) => write!(f, "!{child}"),
            Formula::And(left, right) => write!(f, "({left} & {right})"),
            Formula::Or(left, right) => write!(f, "({left} | {right})"),
            Formula::Since {
                left,
                right,
                window,
            } => write!(f, "({left} S{window} {right})"),
            Formula::Once { child, window } => write!(f, "F-{window} {child}"),
            Formula::Historically { child, window } => write!(f, "G-{window} {child}"),
        }
    }
}
