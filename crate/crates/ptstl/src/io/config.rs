//! Run configuration: TOML `.cfg` files selecting a plant and fixing every
//! pipeline knob. A resolved copy (all defaults materialized) is emitted
//! next to the outputs so any run can be reproduced from its artifacts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{DomainSpec, FallbackMode, SynthesisConfig};
use crate::logic::parse_formula;
use crate::mining::{ParameterDomain, SearchParams};
use crate::plants::external::{ExternalPlant, ExternalPlantConfig};
use crate::plants::grid::{DangerLabeler, GridConfig, GridPlant};
use crate::plants::traffic::{CongestionLabeler, TrafficConfig, TrafficPlant};
use crate::plants::{Labeler, Plant};

use super::{atomic_write, FileError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    Grid,
    Traffic,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSection {
    pub kind: PlantKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<TrafficConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalPlantConfig>,
    /// Labeler for external plants: a length-0 formula over `x`/`u` whose
    /// satisfaction marks the unwanted event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_formula: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSection {
    pub oc_min: u32,
    pub oc_max: u32,
    pub max_clauses: usize,
    pub min_gain: f64,
    pub beta: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            oc_min: 0,
            oc_max: 0,
            max_clauses: 1,
            min_gain: 0.0,
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainSection {
    /// Step of the derived threshold grids over each state variable's
    /// observed range. Ignored when `state_grids` is given.
    pub state_step: f64,
    pub clause_bounds: Vec<u32>,
    pub inner_bounds: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_grids: Option<Vec<Vec<f64>>>,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            state_step: 1.0,
            clause_bounds: vec![1, 2],
            inner_bounds: vec![0, 1],
            state_grids: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub traces: usize,
    pub length: usize,
    pub seed: u64,
    pub bound: f64,
    pub max_iterations: usize,
    /// `"uniform"` or `"min-satisfied"`.
    pub fallback: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            traces: 20,
            length: 100,
            seed: 0,
            bound: 0.0,
            max_iterations: 20,
            fallback: "uniform".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub plant: PlantSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub run: RunSection,
}

/// A plant paired with its labeler, ready to simulate.
pub struct ResolvedPlant {
    pub plant: Box<dyn Plant>,
    pub labeler: Box<dyn Labeler>,
    pub name: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, FileError> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, FileError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| FileError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Built-in defaults per plant kind: the 8x7 arena, or the 5-link base
    /// (`d0 = 5`) traffic network.
    pub fn default_for(kind: PlantKind) -> Self {
        RunConfig {
            plant: PlantSection {
                kind,
                grid: (kind == PlantKind::Grid).then(GridConfig::arena_8x7),
                traffic: (kind == PlantKind::Traffic).then(|| TrafficConfig::five_link(5.0)),
                external: None,
                label_formula: None,
            },
            search: SearchSection::default(),
            domain: DomainSection::default(),
            run: RunSection::default(),
        }
    }

    pub fn validate(&self) -> Result<(), FileError> {
        match self.plant.kind {
            PlantKind::Grid => {
                if let Some(grid) = &self.plant.grid {
                    grid.validate()?;
                }
            }
            PlantKind::Traffic => {
                if let Some(traffic) = &self.plant.traffic {
                    traffic.validate()?;
                }
            }
            PlantKind::External => {
                let ext = self.plant.external.as_ref().ok_or_else(|| {
                    FileError::Config("kind = \"external\" needs a [plant.external] table".into())
                })?;
                if ext.command.is_empty() {
                    return Err(FileError::Config("external plant command is empty".into()));
                }
                if self.plant.label_formula.is_none() {
                    return Err(FileError::Config(
                        "external plants need plant.label_formula".into(),
                    ));
                }
            }
        }
        self.search_params()?;
        if self.domain.clause_bounds.is_empty() || self.domain.clause_bounds.contains(&0) {
            return Err(FileError::Config(
                "domain.clause_bounds must be non-empty naturals >= 1".into(),
            ));
        }
        if self.domain.inner_bounds.is_empty() {
            return Err(FileError::Config("domain.inner_bounds must be non-empty".into()));
        }
        if !(self.domain.state_step > 0.0) {
            return Err(FileError::Config("domain.state_step must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.run.bound) {
            return Err(FileError::Config("run.bound must be in [0, 1]".into()));
        }
        if self.run.length < 2 {
            return Err(FileError::Config("run.length must be at least 2".into()));
        }
        self.fallback_mode()?;
        Ok(())
    }

    pub fn search_params(&self) -> Result<SearchParams, FileError> {
        Ok(SearchParams::new(
            self.search.oc_min,
            self.search.oc_max,
            Some(self.search.max_clauses),
            self.search.min_gain,
            self.search.beta,
        )?)
    }

    pub fn fallback_mode(&self) -> Result<FallbackMode, FileError> {
        match self.run.fallback.as_str() {
            "uniform" => Ok(FallbackMode::Uniform),
            "min-satisfied" => Ok(FallbackMode::MinSatisfied),
            other => Err(FileError::Config(format!(
                "run.fallback must be \"uniform\" or \"min-satisfied\", got \"{other}\""
            ))),
        }
    }

    pub fn domain_spec(&self) -> Result<DomainSpec, FileError> {
        if let Some(grids) = &self.domain.state_grids {
            let space = match self.plant.kind {
                PlantKind::Grid => GridPlant::new(self.grid_config()?)?.control_space(),
                PlantKind::Traffic => TrafficPlant::new(self.traffic_config()?)?.control_space(),
                PlantKind::External => {
                    return Err(FileError::Config(
                        "explicit state_grids are not supported for external plants; \
                         use the derived domain"
                            .into(),
                    ))
                }
            };
            let domain = ParameterDomain::new(
                grids.clone(),
                space.sets().to_vec(),
                self.domain.clause_bounds.clone(),
                self.domain.inner_bounds.clone(),
            )?;
            return Ok(DomainSpec::Explicit(domain));
        }
        Ok(DomainSpec::Derived {
            state_step: self.domain.state_step,
            clause_bounds: self.domain.clause_bounds.clone(),
            inner_bounds: self.domain.inner_bounds.clone(),
        })
    }

    pub fn synthesis_config(&self) -> Result<SynthesisConfig, FileError> {
        Ok(SynthesisConfig {
            search: self.search_params()?,
            domain: self.domain_spec()?,
            bound: self.run.bound,
            traces: self.run.traces,
            trace_len: self.run.length,
            seed: self.run.seed,
            max_iterations: self.run.max_iterations,
            fallback: self.fallback_mode()?,
        })
    }

    pub fn grid_config(&self) -> Result<GridConfig, FileError> {
        match (&self.plant.kind, &self.plant.grid) {
            (PlantKind::Grid, Some(grid)) => Ok(grid.clone()),
            (PlantKind::Grid, None) => Ok(GridConfig::arena_8x7()),
            _ => Err(FileError::Config("not a grid plant config".into())),
        }
    }

    pub fn traffic_config(&self) -> Result<TrafficConfig, FileError> {
        match (&self.plant.kind, &self.plant.traffic) {
            (PlantKind::Traffic, Some(traffic)) => Ok(traffic.clone()),
            (PlantKind::Traffic, None) => Ok(TrafficConfig::five_link(5.0)),
            _ => Err(FileError::Config("not a traffic plant config".into())),
        }
    }

    /// Instantiates the configured plant and its labeler. External plants
    /// are spawned here.
    pub fn build_plant(&self) -> Result<ResolvedPlant, FileError> {
        match self.plant.kind {
            PlantKind::Grid => {
                let cfg = self.grid_config()?;
                let labeler = DangerLabeler::new(&cfg);
                Ok(ResolvedPlant {
                    plant: Box::new(GridPlant::new(cfg)?),
                    labeler: Box::new(labeler),
                    name: "grid".into(),
                })
            }
            PlantKind::Traffic => {
                let cfg = self.traffic_config()?;
                let labeler = CongestionLabeler::new(&cfg);
                Ok(ResolvedPlant {
                    plant: Box::new(TrafficPlant::new(cfg)?),
                    labeler: Box::new(labeler),
                    name: "traffic".into(),
                })
            }
            PlantKind::External => {
                let ext = self
                    .plant
                    .external
                    .as_ref()
                    .ok_or_else(|| FileError::Config("missing [plant.external]".into()))?;
                let plant = ExternalPlant::spawn(ext)?;
                let text = self
                    .plant
                    .label_formula
                    .as_ref()
                    .ok_or_else(|| FileError::Config("missing plant.label_formula".into()))?;
                let phi = parse_formula(text, plant.state_dim(), plant.control_dim())?;
                if phi.length() != 0 {
                    return Err(FileError::Config(
                        "plant.label_formula must be a length-0 formula over the current step"
                            .into(),
                    ));
                }
                let labeler = FormulaLabeler { phi };
                Ok(ResolvedPlant {
                    plant: Box::new(plant),
                    labeler: Box::new(labeler),
                    name: "external".into(),
                })
            }
        }
    }

    /// Serializes with every default materialized.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Writes the resolved copy of the config.
    pub fn emit_resolved(&self, path: &Path) -> Result<(), FileError> {
        atomic_write(path, self.to_toml_string().as_bytes())
    }
}

/// Labels a step by evaluating a length-0 formula on the single current
/// sample.
struct FormulaLabeler {
    phi: crate::logic::Formula,
}

impl Labeler for FormulaLabeler {
    fn label(&self, x: &[f64], u: &[f64]) -> bool {
        let trace = crate::logic::Trace::from_samples(vec![crate::logic::Sample::new(
            x.to_vec(),
            u.to_vec(),
        )])
        .expect("single sample");
        self.phi.evaluate(&trace, 0)
    }
}
