//! Enumeration of parametric cause-clause templates.
//!
//! Every template pairs a control scaffold `(G-[1,b?] u_j = c)` with a
//! general part drawn from a restricted grammar: a conjunction or disjunction
//! of distinct atoms, optionally under a single `!`, `F-` or `G-` wrapper.
//! Only the general part counts toward the operator budget; the scaffold's
//! own `G-`, `&`, `F-` are structural.

use crate::logic::{
    NumTerm, ParamInterval, ParametricFormula, Relation, SlotInfo, TimeTerm, Valuation,
};
use crate::logic::{ControlSpace, Formula};

use super::{CauseClause, MiningError, SearchParams};

/// An atom shape with its threshold/value left as a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
enum AtomShape {
    State { var: usize, rel: Relation },
    Control { var: usize },
}

impl AtomShape {
    fn to_parametric(self, slot: String) -> ParametricFormula {
        match self {
            AtomShape::State { var, rel } => ParametricFormula::State {
                var,
                rel,
                threshold: NumTerm::Slot(slot),
            },
            AtomShape::Control { var } => ParametricFormula::Control {
                var,
                value: NumTerm::Slot(slot),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BoolKind {
    Conj,
    Disj,
}

/// A parametric cause clause: concrete `(signal, value)`, a slot for the
/// bound `b`, and a parametric general part.
#[derive(Debug, Clone)]
pub struct ClauseTemplate {
    signal: usize,
    value: f64,
    op_count: u32,
    general: ParametricFormula,
    slots: Vec<SlotInfo>,
    key: String,
}

impl ClauseTemplate {
    fn build(signal: usize, value: f64, op_count: u32, general: ParametricFormula) -> Self {
        let slots = general
            .free_parameters()
            .expect("template slot names are generated unique");
        let key = format!(
            "(G-[1,b?] u{signal} = {value} & F-[1,1] {general})",
        );
        ClauseTemplate {
            signal,
            value,
            op_count,
            general,
            slots,
            key,
        }
    }

    pub fn signal(&self) -> usize {
        self.signal
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Operator count of the general part.
    pub fn op_count(&self) -> u32 {
        self.op_count
    }

    pub fn general(&self) -> &ParametricFormula {
        &self.general
    }

    /// Slots of the general part, in textual order.
    pub fn slots(&self) -> &[SlotInfo] {
        &self.slots
    }

    /// Canonical text of the parametric clause, used for deterministic
    /// template ordering.
    pub fn canonical_key(&self) -> &str {
        &self.key
    }

    /// Instantiates the template at a concrete bound and general-part
    /// valuation. Fails if an instantiated inner window is malformed.
    pub fn instantiate(&self, bound: u32, v: &Valuation) -> Result<CauseClause, MiningError> {
        let general: Formula = self.general.instantiate(v)?;
        CauseClause::new(self.signal, self.value, bound, general)
    }
}

/// Yields every clause template whose general part has an operator count in
/// `[params.oc_min, params.oc_max]`, ordered by (operator count, canonical
/// string). The atom alphabet is `x_i > ?`, `x_i < ?` for each state
/// variable and `u_j = ?` for each control variable.
pub fn enumerate_templates(
    n: usize,
    m: usize,
    space: &ControlSpace,
    params: &SearchParams,
) -> Result<Vec<ClauseTemplate>, MiningError> {
    if params.oc_min > params.oc_max {
        return Err(MiningError::OcBounds {
            oc_min: params.oc_min,
            oc_max: params.oc_max,
        });
    }
    let mut atoms = Vec::new();
    for var in 0..n {
        atoms.push(AtomShape::State {
            var,
            rel: Relation::Gt,
        });
        atoms.push(AtomShape::State {
            var,
            rel: Relation::Lt,
        });
    }
    for var in 0..m {
        atoms.push(AtomShape::Control { var });
    }

    let mut generals: Vec<(u32, ParametricFormula)> = Vec::new();
    for oc in params.oc_min..=params.oc_max {
        // Bare conjunction/disjunction of oc+1 atoms.
        for combo in combinations(atoms.len(), oc as usize + 1) {
            if combo.len() == 1 {
                generals.push((oc, body(&atoms, &combo, BoolKind::Conj)));
            } else {
                generals.push((oc, body(&atoms, &combo, BoolKind::Conj)));
                generals.push((oc, body(&atoms, &combo, BoolKind::Disj)));
            }
        }
        if oc == 0 {
            continue;
        }
        // Single-level wrappers spend one operator on the wrapper itself.
        let inner_atoms = oc as usize;
        for combo in combinations(atoms.len(), inner_atoms) {
            let bodies: Vec<(BoolKind, bool)> = if combo.len() == 1 {
                vec![(BoolKind::Conj, true)]
            } else {
                vec![(BoolKind::Conj, false), (BoolKind::Disj, false)]
            };
            for (kind, single) in bodies {
                let inner = body(&atoms, &combo, kind);
                if single {
                    // `!` wraps single atoms only.
                    generals.push((oc, ParametricFormula::not(inner.clone())));
                }
                let window = ParamInterval {
                    lo: TimeTerm::Slot("wa".into()),
                    hi: TimeTerm::Slot("wb".into()),
                };
                generals.push((oc, ParametricFormula::once(inner.clone(), window.clone())));
                generals.push((oc, ParametricFormula::historically(inner, window)));
            }
        }
    }

    let mut templates = Vec::new();
    for (oc, general) in generals {
        for signal in 0..space.dims() {
            for &value in space.values(signal) {
                templates.push(ClauseTemplate::build(signal, value, oc, general.clone()));
            }
        }
    }
    templates.sort_by(|a, b| {
        a.op_count
            .cmp(&b.op_count)
            .then_with(|| a.key.cmp(&b.key))
    });
    Ok(templates)
}

/// Conjunction/disjunction over the chosen atom shapes, with fresh slot
/// names `g0, g1, ...` in atom order.
fn body(atoms: &[AtomShape], combo: &[usize], kind: BoolKind) -> ParametricFormula {
    let mut parts = combo
        .iter()
        .enumerate()
        .map(|(slot_idx, &atom_idx)| atoms[atom_idx].to_parametric(format!("g{slot_idx}")));
    let first = parts.next().expect("combinations are non-empty");
    parts.fold(first, |acc, next| match kind {
        BoolKind::Conj => ParametricFormula::and(acc, next),
        BoolKind::Disj => ParametricFormula::or(acc, next),
    })
}

/// All ascending index combinations of size `k` from `0..len`.
fn combinations(len: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 || k > len {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut indices: Vec<usize> = (0..k).collect();
    loop {
        out.push(indices.clone());
        // Advance the odometer.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if indices[i] != i + len - k {
                break;
            }
        }
        indices[i] += 1;
        for j in i + 1..k {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space01() -> ControlSpace {
        ControlSpace::new(vec![vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn atom_only_templates() {
        let params = SearchParams::new(0, 0, Some(1), 0.0, 1.0).unwrap();
        let templates = enumerate_templates(1, 1, &space01(), &params).unwrap();
        // Generals {x0 > g0, x0 < g0, u0 = g0} paired with c in {0, 1}.
        assert_eq!(templates.len(), 6);
        assert!(templates.iter().all(|t| t.op_count() == 0));
        let keys: Vec<&str> = templates.iter().map(ClauseTemplate::canonical_key).collect();
        assert!(keys.contains(&"(G-[1,b?] u0 = 0 & F-[1,1] x0 > g0?)"));
        assert!(keys.contains(&"(G-[1,b?] u0 = 1 & F-[1,1] u0 = g0?)"));
    }

    #[test]
    fn pair_conjunctions_present_at_oc_one() {
        let params = SearchParams::new(1, 1, Some(1), 0.0, 1.0).unwrap();
        let templates = enumerate_templates(2, 1, &space01(), &params).unwrap();
        assert!(templates
            .iter()
            .any(|t| t.general().to_string() == "(x0 > g0? & x1 > g1?)"));
        assert!(templates
            .iter()
            .any(|t| t.general().to_string() == "(x0 < g0? | x1 < g1?)"));
        assert!(templates
            .iter()
            .any(|t| t.general().to_string() == "!x0 > g0?"));
        assert!(templates
            .iter()
            .any(|t| t.general().to_string() == "F-[wa?,wb?] u0 = g0?"));
        assert!(templates.iter().all(|t| t.op_count() == 1));
    }

    #[test]
    fn templates_sorted_by_count_then_key() {
        let params = SearchParams::new(0, 1, Some(1), 0.0, 1.0).unwrap();
        let templates = enumerate_templates(1, 1, &space01(), &params).unwrap();
        let mut prev: Option<(&u32, &str)> = None;
        let pairs: Vec<(u32, &str)> = templates
            .iter()
            .map(|t| (t.op_count(), t.canonical_key()))
            .collect();
        for (oc, key) in &pairs {
            if let Some((poc, pkey)) = prev {
                assert!((poc, pkey) <= (oc, key));
            }
            prev = Some((oc, key));
        }
    }

    #[test]
    fn invalid_oc_range_never_builds_stream() {
        assert!(SearchParams::new(2, 1, None, 0.0, 1.0).is_err());
        let bad = SearchParams {
            oc_min: 2,
            oc_max: 1,
            max_clauses: None,
            min_gain: 0.0,
            beta: 1.0,
        };
        assert!(enumerate_templates(1, 1, &space01(), &bad).is_err());
    }

    #[test]
    fn instantiate_produces_clause() {
        let params = SearchParams::new(0, 0, Some(1), 0.0, 1.0).unwrap();
        let templates = enumerate_templates(1, 1, &space01(), &params).unwrap();
        let t = templates
            .iter()
            .find(|t| t.canonical_key() == "(G-[1,b?] u0 = 1 & F-[1,1] x0 > g0?)")
            .unwrap();
        let v = Valuation::new().set_real("g0", 20.0);
        let clause = t.instantiate(2, &v).unwrap();
        assert_eq!(clause.to_string(), "(G-[1,2] u0 = 1 & F-[1,1] x0 > 20)");
    }
}
