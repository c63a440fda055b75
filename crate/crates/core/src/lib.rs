//! Deterministic profit model and scenario engine for a smallholder coffee
//! value chain: harvest, primary processing (drying, dehulling) and sale of
//! fresh cherries, dried cherries or green beans to five market outlets.
//!
//! [`model`] holds the pure profit equations, [`scenario`] the case catalog,
//! sweeps, breakeven solvers and allocation optimizer, [`config`] and
//! [`report`] the JSON configuration and CSV/JSON reports.

pub mod config;
pub mod model;
pub mod report;
pub mod scenario;

pub use config::{default_config, load_config, parse_config, ConfigError, EngineOptions, ModelConfig};
pub use model::{
    evaluate_scenario, Activity, AllocationPlan, ConversionRates, CostBasis, CostSchedule,
    FarmParameters, MarketOutlet, MarketSet, ModelError, Product, ScenarioResult,
};
pub use report::{render_report, write_report, ReportFormat, ReportRow};
pub use scenario::ScenarioError;
