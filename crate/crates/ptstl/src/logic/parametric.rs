//! Parametric ptSTL: formulas whose numeric constants and interval endpoints
//! may be named parameter slots, instantiated by a valuation.

use std::collections::BTreeMap;
use std::fmt;

use super::formula::{fmt_number, Formula, FormulaError, Interval, Relation};

/// A numeric leaf: a literal threshold/control value or a named slot.
#[derive(Debug, Clone, PartialEq)]
pub enum NumTerm {
    Lit(f64),
    Slot(String),
}

/// A time-bound leaf: a literal natural or a named slot.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeTerm {
    Lit(u32),
    Slot(String),
}

/// A window whose endpoints may be slots. `lo <= hi` is checked once both
/// endpoints are concrete.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamInterval {
    pub lo: TimeTerm,
    pub hi: TimeTerm,
}

impl ParamInterval {
    pub fn literal(iv: &Interval) -> Self {
        ParamInterval {
            lo: TimeTerm::Lit(iv.lo()),
            hi: TimeTerm::Lit(iv.hi()),
        }
    }
}

/// What kind of value a slot takes, with the variable it binds to where that
/// matters for choosing a candidate grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    StateThreshold { var: usize },
    ControlValue { var: usize },
    TimeBound,
}

impl SlotKind {
    pub fn describes(&self) -> &'static str {
        match self {
            SlotKind::StateThreshold { .. } => "state-threshold",
            SlotKind::ControlValue { .. } => "control-value",
            SlotKind::TimeBound => "time-bound",
        }
    }
}

/// A slot together with its kind, in left-to-right tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotInfo {
    pub name: String,
    pub kind: SlotKind,
}

/// A concrete value assigned to a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlotValue {
    Real(f64),
    Time(u32),
}

/// A parameter valuation: maps slot names to concrete values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Valuation {
    values: BTreeMap<String, SlotValue>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn set(mut self, name: impl Into<String>, value: SlotValue) -> Self {
        self.values.insert(name.into(), value);
        self
    }

    pub fn set_real(self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, SlotValue::Real(value))
    }

    pub fn set_time(self, name: impl Into<String>, value: u32) -> Self {
        self.set(name, SlotValue::Time(value))
    }

    pub fn get(&self, name: &str) -> Option<&SlotValue> {
        self.values.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A ptSTL formula tree in which any threshold, control value, or interval
/// endpoint may be a named parameter slot.
#[derive(Debug, Clone, PartialEq)]
pub enum ParametricFormula {
    True,
    False,
    State {
        var: usize,
        rel: Relation,
        threshold: NumTerm,
    },
    Control {
        var: usize,
        value: NumTerm,
    },
    Not(Box<ParametricFormula>),
    And(Box<ParametricFormula>, Box<ParametricFormula>),
    Or(Box<ParametricFormula>, Box<ParametricFormula>),
    Since {
        left: Box<ParametricFormula>,
        right: Box<ParametricFormula>,
        window: ParamInterval,
    },
    Once {
        child: Box<ParametricFormula>,
        window: ParamInterval,
    },
    Historically {
        child: Box<ParametricFormula>,
        window: ParamInterval,
    },
}

impl ParametricFormula {
    pub fn not(child: ParametricFormula) -> Self {
        ParametricFormula::Not(Box::new(child))
    }

    pub fn and(left: ParametricFormula, right: ParametricFormula) -> Self {
        ParametricFormula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: ParametricFormula, right: ParametricFormula) -> Self {
        ParametricFormula::Or(Box::new(left), Box::new(right))
    }

    pub fn once(child: ParametricFormula, window: ParamInterval) -> Self {
        ParametricFormula::Once {
            child: Box::new(child),
            window,
        }
    }

    pub fn historically(child: ParametricFormula, window: ParamInterval) -> Self {
        ParametricFormula::Historically {
            child: Box::new(child),
            window,
        }
    }

    /// Lists slots in left-to-right tree order. Duplicate names are invalid;
    /// the first offender is reported.
    pub fn free_parameters(&self) -> Result<Vec<SlotInfo>, FormulaError> {
        let mut slots = Vec::new();
        self.collect_slots(&mut slots)?;
        Ok(slots)
    }

    fn collect_slots(&self, slots: &mut Vec<SlotInfo>) -> Result<(), FormulaError> {
        fn push(
            slots: &mut Vec<SlotInfo>,
            name: &str,
            kind: SlotKind,
        ) -> Result<(), FormulaError> {
            if slots.iter().any(|s| s.name == name) {
                return Err(FormulaError::DuplicateSlot(name.to_owned()));
            }
            slots.push(SlotInfo {
                name: name.to_owned(),
                kind,
            });
            Ok(())
        }
        fn push_window(
            slots: &mut Vec<SlotInfo>,
            window: &ParamInterval,
        ) -> Result<(), FormulaError> {
            if let TimeTerm::Slot(name) = &window.lo {
                push(slots, name, SlotKind::TimeBound)?;
            }
            if let TimeTerm::Slot(name) = &window.hi {
                push(slots, name, SlotKind::TimeBound)?;
            }
            Ok(())
        }
        match self {
            ParametricFormula::True | ParametricFormula::False => Ok(()),
            ParametricFormula::State { var, threshold, .. } => {
                if let NumTerm::Slot(name) = threshold {
                    push(slots, name, SlotKind::StateThreshold { var: *var })?;
                }
                Ok(())
            }
            ParametricFormula::Control { var, value } => {
                if let NumTerm::Slot(name) = value {
                    push(slots, name, SlotKind::ControlValue { var: *var })?;
                }
                Ok(())
            }
            ParametricFormula::Not(child) => child.collect_slots(slots),
            ParametricFormula::And(left, right) | ParametricFormula::Or(left, right) => {
                left.collect_slots(slots)?;
                right.collect_slots(slots)
            }
            ParametricFormula::Since {
                left,
                right,
                window,
            } => {
                left.collect_slots(slots)?;
                push_window(slots, window)?;
                right.collect_slots(slots)
            }
            ParametricFormula::Once { child, window }
            | ParametricFormula::Historically { child, window } => {
                push_window(slots, window)?;
                child.collect_slots(slots)
            }
        }
    }

    /// Replaces every slot with its value from `v`, yielding a concrete
    /// formula. The valuation must cover exactly the formula's slots, values
    /// must match slot kinds, and every instantiated interval must satisfy
    /// `lo <= hi`.
    pub fn instantiate(&self, v: &Valuation) -> Result<Formula, FormulaError> {
        let slots = self.free_parameters()?;
        for slot in &slots {
            if v.get(&slot.name).is_none() {
                return Err(FormulaError::MissingSlot(slot.name.clone()));
            }
        }
        for name in v.names() {
            if !slots.iter().any(|s| s.name == name) {
                return Err(FormulaError::UnknownSlot(name.to_owned()));
            }
        }
        self.substitute(v)
    }

    fn substitute(&self, v: &Valuation) -> Result<Formula, FormulaError> {
        let num = |term: &NumTerm| -> Result<f64, FormulaError> {
            match term {
                NumTerm::Lit(x) => Ok(*x),
                NumTerm::Slot(name) => match v.get(name) {
                    Some(SlotValue::Real(x)) => Ok(*x),
                    Some(SlotValue::Time(_)) => Err(FormulaError::SlotKindMismatch {
                        name: name.clone(),
                        expected: "real",
                    }),
                    None => Err(FormulaError::MissingSlot(name.clone())),
                },
            }
        };
        let time = |term: &TimeTerm| -> Result<u32, FormulaError> {
            match term {
                TimeTerm::Lit(t) => Ok(*t),
                TimeTerm::Slot(name) => match v.get(name) {
                    Some(SlotValue::Time(t)) => Ok(*t),
                    Some(SlotValue::Real(_)) => Err(FormulaError::SlotKindMismatch {
                        name: name.clone(),
                        expected: "time-bound",
                    }),
                    None => Err(FormulaError::MissingSlot(name.clone())),
                },
            }
        };
        let window = |w: &ParamInterval| -> Result<Interval, FormulaError> {
            Interval::new(time(&w.lo)?, time(&w.hi)?)
        };
        Ok(match self {
            ParametricFormula::True => Formula::True,
            ParametricFormula::False => Formula::False,
            ParametricFormula::State {
                var,
                rel,
                threshold,
            } => Formula::State {
                var: *var,
                rel: *rel,
                threshold: num(threshold)?,
            },
            ParametricFormula::Control { var, value } => Formula::Control {
                var: *var,
                value: num(value)?,
            },
            ParametricFormula::Not(child) => Formula::Not(Box::new(child.substitute(v)?)),
            ParametricFormula::And(left, right) => Formula::And(
                Box::new(left.substitute(v)?),
                Box::new(right.substitute(v)?),
            ),
            ParametricFormula::Or(left, right) => Formula::Or(
                Box::new(left.substitute(v)?),
                Box::new(right.substitute(v)?),
            ),
            ParametricFormula::Since {
                left,
                right,
                window: w,
            } => Formula::Since {
                left: Box::new(left.substitute(v)?),
                right: Box::new(right.substitute(v)?),
                window: window(w)?,
            },
            ParametricFormula::Once { child, window: w } => Formula::Once {
                child: Box::new(child.substitute(v)?),
                window: window(w)?,
            },
            ParametricFormula::Historically { child, window: w } => Formula::Historically {
                child: Box::new(child.substitute(v)?),
                window: window(w)?,
            },
        })
    }

    /// Converts to a concrete formula; errors if any slot remains.
    pub fn try_into_formula(&self) -> Result<Formula, FormulaError> {
        if self.free_parameters()?.is_empty() {
            self.substitute(&Valuation::new())
        } else {
            Err(FormulaError::HasSlots)
        }
    }

    pub fn check_vars(&self, n: usize, m: usize) -> Result<(), FormulaError> {
        match self {
            ParametricFormula::True | ParametricFormula::False => Ok(()),
            ParametricFormula::State { var, .. } => {
                if *var < n {
                    Ok(())
                } else {
                    Err(FormulaError::StateVarOutOfRange { var: *var, n })
                }
            }
            ParametricFormula::Control { var, .. } => {
                if *var < m {
                    Ok(())
                } else {
                    Err(FormulaError::ControlVarOutOfRange { var: *var, m })
                }
            }
            ParametricFormula::Not(child)
            | ParametricFormula::Once { child, .. }
            | ParametricFormula::Historically { child, .. } => child.check_vars(n, m),
            ParametricFormula::And(left, right)
            | ParametricFormula::Or(left, right)
            | ParametricFormula::Since { left, right, .. } => {
                left.check_vars(n, m)?;
                right.check_vars(n, m)
            }
        }
    }
}

impl From<Formula> for ParametricFormula {
    fn from(phi: Formula) -> Self {
        match phi {
            Formula::True => ParametricFormula::True,
            Formula::False => ParametricFormula::False,
            Formula::State {
                var,
                rel,
                threshold,
            } => ParametricFormula::State {
                var,
                rel,
                threshold: NumTerm::Lit(threshold),
            },
            Formula::Control { var, value } => ParametricFormula::Control {
                var,
                value: NumTerm::Lit(value),
            },
            Formula::Not(child) => ParametricFormula::not((*child).into()),
            Formula::And(left, right) => ParametricFormula::and((*left).into(), (*right).into()),
            Formula::Or(left, right) => ParametricFormula::or((*left).into(), (*right).into()),
            Formula::Since {
                left,
                right,
                window,
            } => ParametricFormula::Since {
                left: Box::new((*left).into()),
                right: Box::new((*right).into()),
                window: ParamInterval::literal(&window),
            },
            Formula::Once { child, window } => ParametricFormula::Once {
                child: Box::new((*child).into()),
                window: ParamInterval::literal(&window),
            },
            Formula::Historically { child, window } => ParametricFormula::Historically {
                child: Box::new((*child).into()),
                window: ParamInterval::literal(&window),
            },
        }
    }
}

impl fmt::Display for NumTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumTerm::Lit(x) => fmt_number(f, *x),
            NumTerm::Slot(name) => write!(f, "{name}?"),
        }
    }
}

impl fmt::Display for TimeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeTerm::Lit(t) => write!(f, "{t}"),
            TimeTerm::Slot(name) => write!(f, "{name}?"),
        }
    }
}

impl fmt::Display for ParamInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

impl fmt::Display for ParametricFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParametricFormula::True => write!(f, "true"),
            ParametricFormula::False => write!(f, "false"),
            ParametricFormula::State {
                var,
                rel,
                threshold,
            } => write!(f, "x{var} {} {threshold}", rel.symbol()),
            ParametricFormula::Control { var, value } => write!(f, "u{var} = {value}"),
            ParametricFormula::Not(child) => write!(f, "!{child}"),
            ParametricFormula::And(left, right) => write!(f, "({left} & {right})"),
            ParametricFormula::Or(left, right) => write!(f, "({left} | {right})"),
            ParametricFormula::Since {
                left,
                right,
                window,
            } => write!(f, "({left} S{window} {right})"),
            ParametricFormula::Once { child, window } => write!(f, "F-{window} {child}"),
            ParametricFormula::Historically { child, window } => write!(f, "G-{window} {child}"),
        }
    }
}
