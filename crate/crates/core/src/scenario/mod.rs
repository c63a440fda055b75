//! Scenario analysis over the profit model.

mod breakeven;
mod cases;
mod optimize;
mod reconcile;
mod sweep;

use thiserror::Error;

use crate::model::ModelError;

pub use breakeven::{
    bisect, breakeven, breakeven_price, breakeven_unit_cost, Breakeven, InfeasibleReason,
    MarketSelection,
};
pub use cases::{builtin_cases, run_case, CaseOutcome, CaseSpec, SplitAxis};
pub use optimize::{optimize_allocation, OptimizationConstraint, Optimum};
pub use reconcile::{reconcile_published_figures, ReconciliationReport, ReconciliationRow};
pub use sweep::{grid, sweep, SweepPoint, SweepSeries, SweepSpec, SweepTarget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown case id {0}")]
    UnknownCase(u32),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible breakeven: {0}")]
    InfeasibleBreakeven(String),
    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),
}

pub type Result<T, E = ScenarioError> = std::result::Result<T, E>;
