//! Signalized traffic network of finite queues.
//!
//! Each link `l` holds `x_l` vehicles up to its capacity. When a link's
//! movement is actuated, up to `c_l` vehicles depart, limited by the queue
//! itself and by downstream supply; a turn ratio `beta` of the departing
//! flow arrives at each downstream link and the remainder leaves the
//! network. Source links receive an exogenous inflow drawn uniformly from
//! `[0, d_l]` each step.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::logic::ControlSpace;

use super::{Labeler, Plant, PlantError};

/// A routed movement `from -> to` taking `turn_ratio` of the upstream
/// outflow, with `supply_ratio` of the downstream free space available to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnEdge {
    pub from: usize,
    pub to: usize,
    pub turn_ratio: f64,
    #[serde(default = "one")]
    pub supply_ratio: f64,
}

fn one() -> f64 {
    1.0
}

/// Gates a link's outflow on a signal value; ungated links always flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalGate {
    pub link: usize,
    pub signal: usize,
    pub active_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    /// Vehicle capacity per link.
    pub capacities: Vec<f64>,
    /// Saturation flow per link (max vehicles departing per step).
    pub saturation_flows: Vec<f64>,
    /// Exogenous inflow bound per link; 0 for non-source links.
    pub inflow_bounds: Vec<f64>,
    pub edges: Vec<TurnEdge>,
    pub gates: Vec<SignalGate>,
    /// Number of traffic signals, each in {0, 1}.
    pub signals: usize,
    /// Congestion thresholds per link; a step is labeled 1 iff some link is
    /// at or above its threshold.
    pub label_thresholds: Vec<f64>,
    /// Initial state upper bound per link (uniform over `[0, init_hi_l]`);
    /// defaults to the label thresholds so traces start uncongested.
    #[serde(default)]
    pub init_hi: Option<Vec<f64>>,
}

impl TrafficConfig {
    /// The 5-link, 2-signal network: a horizontal line 0 -> 1 -> 2 with the
    /// printed turn ratios forming a 2 -> 3 return edge and 4 -> 1 merge.
    /// `d0` is link 0's exogenous inflow bound (5 base, 10 congested).
    pub fn five_link(d0: f64) -> Self {
        TrafficConfig {
            capacities: vec![40.0, 40.0, 40.0, 20.0, 20.0],
            saturation_flows: vec![20.0, 20.0, 20.0, 10.0, 10.0],
            inflow_bounds: vec![d0, 0.0, 0.0, 5.0, 5.0],
            edges: vec![
                TurnEdge {
                    from: 0,
                    to: 1,
                    turn_ratio: 0.75,
                    supply_ratio: 1.0,
                },
                TurnEdge {
                    from: 1,
                    to: 2,
                    turn_ratio: 0.75,
                    supply_ratio: 1.0,
                },
                TurnEdge {
                    from: 2,
                    to: 3,
                    turn_ratio: 0.75,
                    supply_ratio: 1.0,
                },
                TurnEdge {
                    from: 3,
                    to: 1,
                    turn_ratio: 0.3,
                    supply_ratio: 1.0,
                },
                TurnEdge {
                    from: 4,
                    to: 1,
                    turn_ratio: 0.3,
                    supply_ratio: 1.0,
                },
            ],
            gates: vec![
                SignalGate {
                    link: 0,
                    signal: 0,
                    active_value: 0.0,
                },
                SignalGate {
                    link: 3,
                    signal: 0,
                    active_value: 1.0,
                },
                SignalGate {
                    link: 1,
                    signal: 1,
                    active_value: 0.0,
                },
                SignalGate {
                    link: 4,
                    signal: 1,
                    active_value: 1.0,
                },
            ],
            signals: 2,
            label_thresholds: vec![30.0, 30.0, 30.0, 15.0, 15.0],
            init_hi: None,
        }
    }

    pub fn links(&self) -> usize {
        self.capacities.len()
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let links = self.links();
        if links == 0 {
            return Err(PlantError::BadConfig("no links".into()));
        }
        for (name, v) in [
            ("saturation_flows", &self.saturation_flows),
            ("inflow_bounds", &self.inflow_bounds),
            ("label_thresholds", &self.label_thresholds),
        ] {
            if v.len() != links {
                return Err(PlantError::BadConfig(format!(
                    "{name} has {} entries, expected {links}",
                    v.len()
                )));
            }
        }
        if let Some(init) = &self.init_hi {
            if init.len() != links {
                return Err(PlantError::BadConfig(format!(
                    "init_hi has {} entries, expected {links}",
                    init.len()
                )));
            }
        }
        if self.capacities.iter().any(|&c| !(c > 0.0)) {
            return Err(PlantError::BadConfig("capacities must be positive".into()));
        }
        let mut out_ratio = vec![0.0f64; links];
        for edge in &self.edges {
            if edge.from >= links || edge.to >= links {
                return Err(PlantError::BadConfig(format!(
                    "edge {} -> {} references a missing link",
                    edge.from, edge.to
                )));
            }
            if !(edge.turn_ratio > 0.0 && edge.turn_ratio <= 1.0) {
                return Err(PlantError::BadConfig(format!(
                    "turn ratio {} on edge {} -> {} outside (0, 1]",
                    edge.turn_ratio, edge.from, edge.to
                )));
            }
            if !(edge.supply_ratio > 0.0 && edge.supply_ratio <= 1.0) {
                return Err(PlantError::BadConfig(format!(
                    "supply ratio {} on edge {} -> {} outside (0, 1]",
                    edge.supply_ratio, edge.from, edge.to
                )));
            }
            out_ratio[edge.from] += edge.turn_ratio;
        }
        for (l, &sum) in out_ratio.iter().enumerate() {
            if sum > 1.0 + 1e-9 {
                return Err(PlantError::BadConfig(format!(
                    "turn ratios out of link {l} sum to {sum} > 1"
                )));
            }
        }
        for gate in &self.gates {
            if gate.link >= links {
                return Err(PlantError::BadConfig(format!(
                    "gate references missing link {}",
                    gate.link
                )));
            }
            if gate.signal >= self.signals {
                return Err(PlantError::BadConfig(format!(
                    "gate references missing signal {}",
                    gate.signal
                )));
            }
        }
        Ok(())
    }

    fn actuated(&self, link: usize, u: &[f64]) -> bool {
        self.gates
            .iter()
            .filter(|g| g.link == link)
            .all(|g| u[g.signal] == g.active_value)
    }
}

/// One step of the queue network dynamics.
///
/// Per link: outflow `f_l = 0` if the movement is not actuated, otherwise
/// `min(c_l, x_l, min over edges (l->m) of alpha * (cap_m - x_m) / beta)`;
/// then `x'_l = clamp(x_l - f_l + sum over edges (m->l) of beta * f_m + w_l,
/// 0, cap_l)` with `w_l` uniform on `[0, d_l]`.
pub fn traffic_step(
    x: &[f64],
    u: &[f64],
    cfg: &TrafficConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, PlantError> {
    let links = cfg.links();
    if x.len() != links {
        return Err(PlantError::StateDim {
            expected: links,
            found: x.len(),
        });
    }
    if u.len() != cfg.signals {
        return Err(PlantError::ControlDim {
            expected: cfg.signals,
            found: u.len(),
        });
    }
    for (l, &v) in x.iter().enumerate() {
        if !(0.0..=cfg.capacities[l]).contains(&v) {
            return Err(PlantError::StateOutOfBounds {
                index: l,
                value: v,
                lo: 0.0,
                hi: cfg.capacities[l],
            });
        }
    }

    let mut outflow = vec![0.0f64; links];
    for l in 0..links {
        if !cfg.actuated(l, u) {
            continue;
        }
        let mut f = cfg.saturation_flows[l].min(x[l]);
        for edge in cfg.edges.iter().filter(|e| e.from == l) {
            let supply = edge.supply_ratio * (cfg.capacities[edge.to] - x[edge.to]);
            f = f.min(supply / edge.turn_ratio);
        }
        outflow[l] = f.max(0.0);
    }

    let mut next = Vec::with_capacity(links);
    for l in 0..links {
        let arrivals: f64 = cfg
            .edges
            .iter()
            .filter(|e| e.to == l)
            .map(|e| e.turn_ratio * outflow[e.from])
            .sum();
        let noise = if cfg.inflow_bounds[l] > 0.0 {
            rng.gen_range(0.0..cfg.inflow_bounds[l])
        } else {
            0.0
        };
        let v = x[l] - outflow[l] + arrivals + noise;
        next.push(v.clamp(0.0, cfg.capacities[l]));
    }
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct TrafficPlant {
    cfg: TrafficConfig,
}

impl TrafficPlant {
    pub fn new(cfg: TrafficConfig) -> Result<Self, PlantError> {
        cfg.validate()?;
        Ok(TrafficPlant { cfg })
    }

    pub fn config(&self) -> &TrafficConfig {
        &self.cfg
    }
}

impl Plant for TrafficPlant {
    fn state_dim(&self) -> usize {
        self.cfg.links()
    }

    fn control_dim(&self) -> usize {
        self.cfg.signals
    }

    fn control_space(&self) -> ControlSpace {
        ControlSpace::new(vec![vec![0.0, 1.0]; self.cfg.signals]).expect("binary signals")
    }

    fn initial_state(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PlantError> {
        let hi = self
            .cfg
            .init_hi
            .clone()
            .unwrap_or_else(|| self.cfg.label_thresholds.clone());
        Ok(hi
            .iter()
            .map(|&h| if h > 0.0 { rng.gen_range(0.0..h) } else { 0.0 })
            .collect())
    }

    fn step(
        &mut self,
        x: &[f64],
        u: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, PlantError> {
        traffic_step(x, u, &self.cfg, rng)
    }
}

/// Labels a step 1 iff any link is at or above its congestion threshold,
/// i.e. the conjunction `x_l < threshold_l` over all links is violated.
#[derive(Debug, Clone)]
pub struct CongestionLabeler {
    thresholds: Vec<f64>,
}

impl CongestionLabeler {
    pub fn new(cfg: &TrafficConfig) -> Self {
        CongestionLabeler {
            thresholds: cfg.label_thresholds.clone(),
        }
    }
}

impl Labeler for CongestionLabeler {
    fn label(&self, x: &[f64], _u: &[f64]) -> bool {
        x.iter()
            .zip(&self.thresholds)
            .any(|(&v, &threshold)| v >= threshold)
    }
}
