//! Model configuration: the embedded Sultan Kudarat dataset, JSON loading
//! with field-by-field overlay, and validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    self, ActivitySd, AllocationPlan, ConversionRates, CostBasis, CostSchedule, FarmParameters,
    MarketOutlet, MarketSet, ModelError, PriceSd, ScenarioResult,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("invalid {section}: {source}")]
    Invalid {
        section: &'static str,
        #[source]
        source: ModelError,
    },
}

/// Knobs for the scenario engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineOptions {
    /// Increment of allocation grids (Case 14 split, optimizer cross-check).
    pub grid_step: f64,
    /// Absolute tolerance of the bisection cross-check, in the axis' units.
    pub bisection_tolerance: f64,
    /// When set, replaces `costs.cost_basis` for every evaluation.
    pub cost_basis_override: Option<CostBasis>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            grid_step: 0.05,
            bisection_tolerance: 1e-6,
            cost_basis_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub farm: FarmParameters,
    pub rates: ConversionRates,
    pub costs: CostSchedule,
    pub markets: MarketSet,
    #[serde(default)]
    pub engine: EngineOptions,
}

impl Default for ModelConfig {
    fn default() -> Self {
        default_config()
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |section| move |source| ConfigError::Invalid { section, source };
        self.farm.validate().map_err(wrap("farm"))?;
        self.rates.validate().map_err(wrap("rates"))?;
        self.costs.validate().map_err(wrap("costs"))?;
        self.markets.validate().map_err(wrap("markets"))?;
        let engine = &self.engine;
        if !(engine.grid_step > 0.0 && engine.grid_step <= 1.0) {
            return Err(wrap("engine")(ModelError::Invalid {
                field: "grid_step".into(),
                reason: format!("∉ (0,1] (got {})", engine.grid_step),
            }));
        }
        if !(engine.bisection_tolerance > 0.0 && engine.bisection_tolerance.is_finite()) {
            return Err(wrap("engine")(ModelError::Invalid {
                field: "bisection_tolerance".into(),
                reason: format!("must be positive (got {})", engine.bisection_tolerance),
            }));
        }
        Ok(())
    }

    pub fn cost_basis(&self) -> CostBasis {
        self.engine
            .cost_basis_override
            .unwrap_or(self.costs.cost_basis)
    }

    /// Cost schedule with the engine's basis override applied.
    pub fn schedule(&self) -> CostSchedule {
        CostSchedule {
            cost_basis: self.cost_basis(),
            ..self.costs
        }
    }

    /// Same config evaluated under `basis`.
    pub fn with_basis(&self, basis: CostBasis) -> ModelConfig {
        let mut out = self.clone();
        out.costs.cost_basis = basis;
        out.engine.cost_basis_override = None;
        out
    }

    pub fn harvest_kg(&self) -> Result<f64, ModelError> {
        model::compute_harvest(&self.farm)
    }

    pub fn evaluate(&self, plan: &AllocationPlan) -> Result<ScenarioResult, ModelError> {
        model::evaluate_scenario(&self.farm, plan, &self.markets, &self.schedule(), &self.rates)
    }

    /// Applies a partial JSON document on top of this config.
    ///
    /// Objects merge key by key, the `markets` list merges by outlet `id`,
    /// anything else replaces the current value. Unknown keys are rejected.
    pub fn overlay(&self, patch: &Value) -> Result<ModelConfig, ConfigError> {
        if !patch.is_object() {
            return Err(ConfigError::Schema("config overlay must be a JSON object".into()));
        }
        let mut merged = serde_json::to_value(self).expect("config serializes");
        merge(&mut merged, patch);
        let config: ModelConfig =
            serde_json::from_value(merged).map_err(|e| ConfigError::Schema(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            for (key, value) in patch {
                match base.get_mut(key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        base.insert(key.clone(), value.clone());
                    }
                }
            }
        }
        (Value::Array(base), Value::Array(patch)) if patch.iter().all(|v| v.get("id").is_some()) => {
            for item in patch {
                let id = &item["id"];
                match base.iter_mut().find(|b| b.get("id") == Some(id)) {
                    Some(slot) => merge(slot, item),
                    None => base.push(item.clone()),
                }
            }
        }
        (slot, value) => *slot = value.clone(),
    }
}

/// Parses a JSON config document and overlays it on [`default_config`].
pub fn parse_config(text: &str) -> Result<ModelConfig, ConfigError> {
    let patch: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    default_config().overlay(&patch)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ModelConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn save_config(config: &ModelConfig, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    let path = path.as_ref();
    fs::write(path, config.to_json_string() + "\n").map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn outlet(id: u8, name: &str, prices: [f64; 3], sd: [f64; 3]) -> MarketOutlet {
    MarketOutlet {
        id,
        name: name.to_string(),
        price_fc: prices[0],
        price_dc: prices[1],
        price_gcb: prices[2],
        price_sd: Some(PriceSd {
            fc: sd[0],
            dc: sd[1],
            gcb: sd[2],
        }),
    }
}

/// The Sultan Kudarat dataset for a one-hectare model farm.
pub fn default_config() -> ModelConfig {
    ModelConfig {
        farm: FarmParameters {
            yield_per_tree: 2.7723,
            trees_per_ha: 1025.0,
            bearing_fraction: 0.80,
            damage_rate: 0.05,
            land_area: 1.0,
        },
        rates: ConversionRates {
            fc_to_dc: 0.45,
            fc_to_gcb: 0.20,
        },
        costs: CostSchedule {
            fertilizer: 0.86,
            fertilizer_application: 1.20,
            pruning: 2.38,
            weeding: 3.38,
            harvesting: 5.98,
            transportation: 2.35,
            gap: 15.20,
            drying: 0.56,
            dehulling: 2.51,
            cost_basis: CostBasis::AllTrees,
            sd_per_activity: Some(ActivitySd {
                fertilizer: 5.1848,
                fertilizer_application: 5.6521,
                pruning: 4.2322,
                weeding: 5.7509,
                harvesting: 10.4203,
                transportation: 3.4235,
                gap: 21.1903,
                drying: 1.8221,
                dehulling: 2.9458,
            }),
        },
        markets: MarketSet::new(vec![
            outlet(1, "Nestle", [0.0, 0.0, 75.41], [0.0, 0.0, 3.05956]),
            outlet(2, "Local Traders", [32.5, 70.7, 69.7], [27.157, 4.51731, 9.54011]),
            outlet(3, "Grower Association", [0.0, 75.0, 74.5], [0.0, 0.0, 0.0]),
            outlet(4, "Direct Selling", [0.0, 72.96, 70.24], [0.0, 3.05956, 3.65911]),
            outlet(5, "Other Markets", [12.0, 75.0, 70.12], [0.0, 0.0, 2.25832]),
        ])
        .expect("embedded markets are valid"),
        engine: EngineOptions::default(),
    }
}
