//! Shared test oracles, independent of the library's evaluation paths.
//!
//! `naive_evaluate` first rewrites derived operators into the core fragment
//! (`Or` into `!(!a & !b)`, `F-` into `true S phi`, `G-` into
//! `!(true S !phi)`) and then runs the textbook quantifier semantics with
//! plain nested loops. `brute_confusion` is a direct transcription of the
//! per-index tally over scored indices `M..=N`.

#![allow(dead_code)]

use ptstl::logic::{ControlSpace, Formula, Interval, Relation, Sample, Trace};
use ptstl::mining::{CauseClause, CombinedCause, Dataset, LabeledTrace};
use ptstl::plants::{Plant, PlantError};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Rewrites every derived operator into the core fragment
/// (atoms, Not, And, Since).
pub fn expand(phi: &Formula) -> Formula {
    match phi {
        Formula::True | Formula::False | Formula::State { .. } | Formula::Control { .. } => {
            phi.clone()
        }
        Formula::Not(c) => Formula::not(expand(c)),
        Formula::And(l, r) => Formula::and(expand(l), expand(r)),
        Formula::Or(l, r) => Formula::not(Formula::and(
            Formula::not(expand(l)),
            Formula::not(expand(r)),
        )),
        Formula::Since { left, right, window } => Formula::Since {
            left: Box::new(expand(left)),
            right: Box::new(expand(right)),
            window: *window,
        },
        Formula::Once { child, window } => Formula::Since {
            left: Box::new(Formula::True),
            right: Box::new(expand(child)),
            window: *window,
        },
        Formula::Historically { child, window } => Formula::not(Formula::Since {
            left: Box::new(Formula::True),
            right: Box::new(Formula::not(expand(child))),
            window: *window,
        }),
    }
}

/// Per-subformula truth tables, filled with the literal quantifier
/// definition at every index (no run-length shortcuts, no early exits
/// beyond `any`/`all`).
fn naive_table(phi: &Formula, trace: &Trace) -> Vec<bool> {
    let len = trace.len();
    match phi {
        Formula::True => vec![true; len],
        Formula::False => vec![false; len],
        Formula::State { var, rel, threshold } => (0..len)
            .map(|k| match rel {
                Relation::Lt => trace.state(k, *var) < *threshold,
                Relation::Gt => trace.state(k, *var) > *threshold,
            })
            .collect(),
        Formula::Control { var, value } => {
            (0..len).map(|k| trace.control(k, *var) == *value).collect()
        }
        Formula::Not(c) => naive_table(c, trace).into_iter().map(|v| !v).collect(),
        Formula::And(l, r) => naive_table(l, trace)
            .into_iter()
            .zip(naive_table(r, trace))
            .map(|(a, b)| a && b)
            .collect(),
        Formula::Since { left, right, window } => {
            let ls = naive_table(left, trace);
            let rs = naive_table(right, trace);
            let lo = window.lo() as usize;
            let hi = window.hi() as usize;
            (0..len)
                .map(|k| {
                    // exists j in [k-hi, k-lo] ∩ [0, k] with right at j and
                    // left at every l in [j, k]
                    (0..=k)
                        .filter(|&j| k >= lo && j + lo <= k && j + hi >= k)
                        .any(|j| rs[j] && (j..=k).all(|l| ls[l]))
                })
                .collect()
        }
        other => panic!("expand first: {other:?}"),
    }
}

/// Satisfaction at every index by the independent route: rewrite to the
/// core fragment, then apply the quantifier semantics.
pub fn naive_satisfaction(phi: &Formula, trace: &Trace) -> Vec<bool> {
    naive_table(&expand(phi), trace)
}

/// Point query through the independent route.
pub fn naive_evaluate(phi: &Formula, trace: &Trace, k: usize) -> bool {
    naive_satisfaction(phi, trace)[k]
}

/// Direct transcription of the length definition on the expanded formula.
pub fn naive_length(phi: &Formula) -> u32 {
    fn core(phi: &Formula) -> u32 {
        match phi {
            Formula::True
            | Formula::False
            | Formula::State { .. }
            | Formula::Control { .. } => 0,
            Formula::Not(c) => core(c),
            Formula::And(l, r) => core(l).max(core(r)),
            Formula::Since { left, right, window } => window.hi() + core(left).max(core(right)),
            other => panic!("expand first: {other:?}"),
        }
    }
    core(&expand(phi))
}

/// Confusion counts written directly from the classifier tally: for each
/// trace and each `i` from `M = length(phi)` to `N`, classify by naive
/// evaluation and compare with the label. Returns (tp, fp, tn, fn).
pub fn brute_confusion(phi: &Formula, data: &Dataset) -> (u64, u64, u64, u64) {
    let m = naive_length(phi) as usize;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for lt in data.traces() {
        let sat = naive_satisfaction(phi, &lt.trace);
        for i in m..lt.trace.len() {
            match (sat[i], lt.labels[i]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    (tp, fp, tn, fn_)
}

pub fn random_interval(rng: &mut ChaCha8Rng, max_hi: u32) -> Interval {
    let lo = rng.gen_range(0..=max_hi);
    let hi = rng.gen_range(lo..=max_hi);
    Interval::new(lo, hi).unwrap()
}

/// A random formula of the given depth over `n` state and `m` control
/// variables, with small integer-ish constants so atoms flip on random
/// traces.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: u32, n: usize, m: usize) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            k if k < 6 || m == 0 => Formula::State {
                var: rng.gen_range(0..n),
                rel: if rng.gen_bool(0.5) {
                    Relation::Gt
                } else {
                    Relation::Lt
                },
                threshold: f64::from(rng.gen_range(-5..=5)) + 0.5 * f64::from(rng.gen_range(0..2)),
            },
            _ => Formula::Control {
                var: rng.gen_range(0..m),
                value: f64::from(rng.gen_range(0..3)),
            },
        }
    } else {
        let d = depth - 1;
        match rng.gen_range(0..6) {
            0 => Formula::not(random_formula(rng, d, n, m)),
            1 => Formula::and(
                random_formula(rng, d, n, m),
                random_formula(rng, d, n, m),
            ),
            2 => Formula::or(
                random_formula(rng, d, n, m),
                random_formula(rng, d, n, m),
            ),
            3 => Formula::Since {
                left: Box::new(random_formula(rng, d, n, m)),
                right: Box::new(random_formula(rng, d, n, m)),
                window: random_interval(rng, 6),
            },
            4 => Formula::Once {
                child: Box::new(random_formula(rng, d, n, m)),
                window: random_interval(rng, 6),
            },
            _ => Formula::Historically {
                child: Box::new(random_formula(rng, d, n, m)),
                window: random_interval(rng, 6),
            },
        }
    }
}

/// A random trace with integer states in [-5, 5] and integer controls in
/// {0, 1, 2}, so the random atoms above get both truth values.
pub fn random_trace(rng: &mut ChaCha8Rng, n: usize, m: usize, max_len: usize) -> Trace {
    let len = rng.gen_range(1..=max_len);
    let samples = (0..len)
        .map(|_| {
            Sample::new(
                (0..n).map(|_| f64::from(rng.gen_range(-5..=5))).collect(),
                (0..m).map(|_| f64::from(rng.gen_range(0..3))).collect(),
            )
        })
        .collect();
    Trace::from_samples(samples).unwrap()
}

/// A random labeled dataset with independently random labels.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    traces: usize,
    min_len: usize,
    max_len: usize,
) -> Dataset {
    let space = ControlSpace::new(vec![vec![0.0, 1.0, 2.0]; m]).unwrap();
    let labeled = (0..traces)
        .map(|_| {
            let mut trace = random_trace(rng, n, m, max_len);
            while trace.len() < min_len {
                trace = random_trace(rng, n, m, max_len);
            }
            let labels = (0..trace.len()).map(|_| rng.gen_bool(0.4)).collect();
            LabeledTrace::new(trace, labels).unwrap()
        })
        .collect();
    Dataset::new(n, m, space, labeled).unwrap()
}

/// A bounded random-walk plant with control-dependent drift; dynamics are
/// arbitrary but deterministic given the rng stream.
pub struct RandomWalkPlant {
    pub n: usize,
    pub space: ControlSpace,
    pub drift: Vec<Vec<f64>>,
}

impl RandomWalkPlant {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=2);
        let sets: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let k = rng.gen_range(2..=3);
                (0..k).map(f64::from).collect()
            })
            .collect();
        let drift = (0..n)
            .map(|_| (0..m).map(|_| f64::from(rng.gen_range(-2..=2))).collect())
            .collect();
        RandomWalkPlant {
            n,
            space: ControlSpace::new(sets).unwrap(),
            drift,
        }
    }
}

impl Plant for RandomWalkPlant {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn control_dim(&self) -> usize {
        self.space.dims()
    }

    fn control_space(&self) -> ControlSpace {
        self.space.clone()
    }

    fn initial_state(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PlantError> {
        Ok((0..self.n)
            .map(|_| f64::from(rng.gen_range(-5..=5)))
            .collect())
    }

    fn step(
        &mut self,
        x: &[f64],
        u: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, PlantError> {
        Ok(x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let push: f64 = self.drift[i].iter().zip(u).map(|(d, uv)| d * uv).sum();
                (v + push + f64::from(rng.gen_range(-1..=1))).clamp(-10.0, 10.0)
            })
            .collect())
    }
}

/// A random combined cause satisfying the avoidance-guarantee premises:
/// every bound is at least 2, and all clauses on the same control dimension
/// avoid the same value (so a jointly avoiding control always exists, as in
/// the guarantee's inductive argument).
pub fn random_guaranteed_cause(
    rng: &mut ChaCha8Rng,
    n: usize,
    space: &ControlSpace,
) -> CombinedCause {
    let m = space.dims();
    let per_dim_value: Vec<f64> = (0..m)
        .map(|j| {
            let values = space.values(j);
            values[rng.gen_range(0..values.len())]
        })
        .collect();
    let clauses = (0..rng.gen_range(1..=3))
        .map(|_| {
            let signal = rng.gen_range(0..m);
            let bound = rng.gen_range(2..=3);
            let depth = rng.gen_range(0..=2);
            let general = random_formula(rng, depth, n, m);
            CauseClause::new(signal, per_dim_value[signal], bound, general).unwrap()
        })
        .collect();
    CombinedCause::from_clauses(clauses)
}
