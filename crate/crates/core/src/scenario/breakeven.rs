//! Zero-profit prices and costs.
//!
//! Profit is affine in every price and every activity cost, so the root is
//! found in closed form from the profit at zero and the slope. Bisection on
//! a bracket independently confirms each value.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::sweep::{price_markets, SweepTarget};
use super::{Result, ScenarioError};
use crate::config::ModelConfig;
use crate::model::{Activity, AllocationPlan, Product, ScenarioResult};

/// Which outlets' prices move in a price breakeven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketSelection {
    /// Every outlet that buys the product.
    AllBuying,
    Single(u8),
}

impl MarketSelection {
    fn as_option(self) -> Option<u8> {
        match self {
            MarketSelection::AllBuying => None,
            MarketSelection::Single(id) => Some(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibleReason {
    ProfitNegativeAtZeroCost,
    ProfitPositiveAtZeroPrice,
    NoSensitivity,
    OutOfBracket,
}

impl fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfeasibleReason::ProfitNegativeAtZeroCost => "profit negative at zero cost",
            InfeasibleReason::ProfitPositiveAtZeroPrice => "profit positive at zero price",
            InfeasibleReason::NoSensitivity => "profit does not depend on this input for the plan",
            InfeasibleReason::OutOfBracket => "breakeven lies outside the search bracket",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Breakeven {
    Value {
        axis: SweepTarget,
        /// Closed-form zero-profit value.
        value: f64,
        /// Independent bisection estimate.
        bisection: f64,
        /// Profit re-evaluated at `value`.
        profit_at_value: f64,
    },
    Infeasible {
        axis: SweepTarget,
        reason: InfeasibleReason,
    },
}

impl Breakeven {
    pub fn value(&self) -> Option<f64> {
        match self {
            Breakeven::Value { value, .. } => Some(*value),
            Breakeven::Infeasible { .. } => None,
        }
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns `None` when the endpoints do not
/// bracket a root.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

const MAX_BISECTIONS: usize = 200;

fn profit_at(
    target: &SweepTarget,
    x: f64,
    config: &ModelConfig,
    plan: &AllocationPlan,
) -> Result<ScenarioResult> {
    let (cfg, p) = target.apply(x, config, plan)?;
    Ok(cfg.evaluate(&p)?)
}

/// Price of `product` at which `plan` breaks even.
pub fn breakeven_price(
    product: Product,
    selection: MarketSelection,
    config: &ModelConfig,
    plan: &AllocationPlan,
) -> Result<Breakeven> {
    let target = SweepTarget::Price {
        product,
        market: selection.as_option(),
    };
    let ids = price_markets(config, product, selection.as_option())?;
    let at_zero = profit_at(&target, 0.0, config, plan)?;
    let mass: f64 = ids
        .iter()
        .map(|&id| at_zero.sellable.of(product)[usize::from(id) - 1])
        .sum();
    if mass <= 0.0 {
        return Err(ScenarioError::InfeasibleBreakeven(format!(
            "plan routes no sellable {product} mass to the selected market(s)"
        )));
    }
    let value = -at_zero.profit / mass;
    let bracket_hi = 10.0 * config.markets.max_price();
    if value < 0.0 {
        return Ok(Breakeven::Infeasible {
            axis: target,
            reason: InfeasibleReason::ProfitPositiveAtZeroPrice,
        });
    }
    if value > bracket_hi {
        return Ok(Breakeven::Infeasible {
            axis: target,
            reason: InfeasibleReason::OutOfBracket,
        });
    }
    confirm(target, value, 0.0, bracket_hi, config, plan)
}

/// Largest per-tree cost of `activity` at which `plan` still breaks even.
pub fn breakeven_unit_cost(
    activity: Activity,
    config: &ModelConfig,
    plan: &AllocationPlan,
) -> Result<Breakeven> {
    let target = SweepTarget::Cost(activity);
    let at_zero = profit_at(&target, 0.0, config, plan)?;
    if at_zero.profit < 0.0 {
        return Ok(Breakeven::Infeasible {
            axis: target,
            reason: InfeasibleReason::ProfitNegativeAtZeroCost,
        });
    }
    // Profit falls by `slope` Php for every Php/tree of this activity.
    let flows = &at_zero.flows;
    let share = if flows.harvest_kg > 0.0 {
        match activity {
            Activity::Drying => (flows.total_dc_raw() + flows.total_gcb_raw()) / flows.harvest_kg,
            Activity::Dehulling => flows.total_gcb_raw() / flows.harvest_kg,
            _ => 1.0,
        }
    } else if matches!(activity, Activity::Drying | Activity::Dehulling) {
        0.0
    } else {
        1.0
    };
    let slope = at_zero.cost_breakdown.tree_count * share;
    if slope <= 0.0 {
        return Ok(Breakeven::Infeasible {
            axis: target,
            reason: InfeasibleReason::NoSensitivity,
        });
    }
    let value = at_zero.profit / slope;

    let schedule = config.costs;
    let mut bracket_hi = 10.0 * Activity::ALL.iter().map(|&a| schedule.get(a)).fold(1.0, f64::max);
    let mut doublings = 0;
    while profit_at(&target, bracket_hi, config, plan)?.profit >= 0.0 && doublings < 64 {
        bracket_hi *= 2.0;
        doublings += 1;
    }
    confirm(target, value, 0.0, bracket_hi, config, plan)
}

fn confirm(
    target: SweepTarget,
    value: f64,
    lo: f64,
    hi: f64,
    config: &ModelConfig,
    plan: &AllocationPlan,
) -> Result<Breakeven> {
    let tol = config.engine.bisection_tolerance / 4.0;
    let f = |x: f64| {
        profit_at(&target, x, config, plan)
            .map(|r| r.profit)
            .unwrap_or(f64::NAN)
    };
    let bisection = bisect(f, lo, hi, tol, MAX_BISECTIONS).ok_or(ScenarioError::InfeasibleBreakeven(
        format!("{target}: bisection bracket [{lo}, {hi}] has no sign change"),
    ))?;
    Ok(Breakeven::Value {
        axis: target,
        value,
        bisection,
        profit_at_value: profit_at(&target, value, config, plan)?.profit,
    })
}

/// Breakeven along any price or activity-cost target.
pub fn breakeven(target: SweepTarget, config: &ModelConfig, plan: &AllocationPlan) -> Result<Breakeven> {
    match target {
        SweepTarget::Price { product, market } => {
            let selection = market.map_or(MarketSelection::AllBuying, MarketSelection::Single);
            breakeven_price(product, selection, config, plan)
        }
        SweepTarget::Cost(activity) => breakeven_unit_cost(activity, config, plan),
        other => Err(ScenarioError::Config(format!(
            "breakeven axis must be a price or an activity cost (got {other})"
        ))),
    }
}
