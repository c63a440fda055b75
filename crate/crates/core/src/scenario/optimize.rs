//! Profit-maximizing allocation.
//!
//! In terms of the share of the harvest that reaches each (product, market)
//! pair, profit is affine and the feasible shares form a simplex (optionally
//! with one pair held at a minimum share). The optimum therefore sits on a
//! vertex, and the vertices are few enough to enumerate.

use serde::{Deserialize, Serialize};

use super::{Result, ScenarioError};
use crate::config::ModelConfig;
use crate::model::{validate_market_id, AllocationPlan, PerMarket, Product, ScenarioResult, MARKET_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum OptimizationConstraint {
    #[default]
    None,
    /// At least `min_fraction` of the harvest goes to `market_id` as `product`.
    MinShare {
        product: Product,
        market_id: u8,
        min_fraction: f64,
    },
}

impl OptimizationConstraint {
    pub fn validate(&self) -> Result<()> {
        if let OptimizationConstraint::MinShare {
            market_id,
            min_fraction,
            ..
        } = *self
        {
            validate_market_id(market_id)
                .map_err(|e| ScenarioError::InfeasibleConstraint(e.to_string()))?;
            if !(0.0..=1.0).contains(&min_fraction) {
                return Err(ScenarioError::InfeasibleConstraint(format!(
                    "min_fraction ∉ [0,1] (got {min_fraction})"
                )));
            }
        }
        Ok(())
    }

    /// Harvest shares that must be allocated before the free remainder.
    fn fixed_shares(&self) -> (Option<(usize, usize)>, f64) {
        match *self {
            OptimizationConstraint::None => (None, 0.0),
            OptimizationConstraint::MinShare {
                product,
                market_id,
                min_fraction,
            } => (
                Some((product as usize, usize::from(market_id) - 1)),
                min_fraction,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub plan: AllocationPlan,
    pub result: ScenarioResult,
}

/// Finds a profit-maximizing plan subject to `constraint`.
///
/// Ties go to the lowest market id, then to FC before DC before GCB. Under a
/// minimum-share constraint the free remainder prefers the other pairs and
/// only joins the constrained pair when that is strictly better.
pub fn optimize_allocation(constraint: &OptimizationConstraint, config: &ModelConfig) -> Result<Optimum> {
    constraint.validate()?;

    // Marginal profit of sending the whole harvest to each pair, relative to selling nothing.
    let idle = config.evaluate(&AllocationPlan::zero())?.profit;
    let mut gain = [[0.0; MARKET_COUNT]; 3];
    for product in Product::ALL {
        for (m, g) in gain[product as usize].iter_mut().enumerate() {
            let vertex = AllocationPlan::vertex(product, m as u8 + 1);
            *g = config.evaluate(&vertex)?.profit - idle;
        }
    }

    let (fixed, min_fraction) = constraint.fixed_shares();
    let mut order: Vec<(usize, usize)> = (0..MARKET_COUNT)
        .flat_map(|m| (0..3).map(move |p| (p, m)))
        .filter(|&slot| Some(slot) != fixed)
        .collect();
    order.extend(fixed);

    let mut residual: Option<(usize, usize)> = None;
    let mut best = 0.0;
    for (p, m) in order {
        if gain[p][m] > best {
            best = gain[p][m];
            residual = Some((p, m));
        }
    }

    let mut shares: [PerMarket; 3] = [[0.0; MARKET_COUNT]; 3];
    if let Some((p, m)) = fixed {
        shares[p][m] += min_fraction;
    }
    if let Some((p, m)) = residual {
        shares[p][m] += 1.0 - min_fraction;
    }
    let plan = AllocationPlan::from_shares(&shares);
    let result = config.evaluate(&plan)?;
    Ok(Optimum { plan, result })
}
