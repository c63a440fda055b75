use serde::{Deserialize, Serialize};

use super::sweep::grid;
use super::{Result, ScenarioError};
use crate::config::ModelConfig;
use crate::model::{AllocationPlan, Product, ScenarioResult};

/// Share of a product split between two markets: `x` to `first`, `1 - x` to `second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAxis {
    pub first: u8,
    pub second: u8,
}

/// One marketing case of the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub id: u32,
    pub product: Product,
    pub description: String,
    /// Allocations that hold in every run of the case.
    pub fixed_allocations: AllocationPlan,
    /// Markets that, one at a time, receive `residual_share` of the product.
    pub residual_markets: Vec<u8>,
    pub residual_share: f64,
    pub split_axis: Option<SplitAxis>,
}

impl CaseSpec {
    fn vertex(id: u32, product: Product, market: u8, market_name: &str) -> Self {
        CaseSpec {
            id,
            product,
            description: format!("all {product} to {market_name}"),
            fixed_allocations: AllocationPlan::vertex(product, market),
            residual_markets: Vec::new(),
            residual_share: 0.0,
            split_axis: None,
        }
    }

    fn association_rule(id: u32, product: Product, residual_markets: Vec<u8>) -> Self {
        let mut fixed = AllocationPlan::zero();
        fixed.stage_mut(product)[2] = 0.7;
        CaseSpec {
            id,
            product,
            description: format!("70% {product} to Grower Association, 30% to one other market"),
            fixed_allocations: fixed,
            residual_markets,
            residual_share: 0.3,
            split_axis: None,
        }
    }

    /// The plans this case evaluates, each with its residual market or split share.
    pub fn plans(&self, grid_step: f64) -> Vec<(Option<u8>, Option<f64>, AllocationPlan)> {
        if let Some(axis) = self.split_axis {
            return grid(0.0, 1.0, grid_step)
                .into_iter()
                .map(|x| {
                    let mut plan = self.fixed_allocations;
                    let stage = plan.stage_mut(self.product);
                    stage[usize::from(axis.first) - 1] = x;
                    stage[usize::from(axis.second) - 1] = 1.0 - x;
                    (None, Some(x), plan)
                })
                .collect();
        }
        if self.residual_markets.is_empty() {
            return vec![(None, None, self.fixed_allocations)];
        }
        self.residual_markets
            .iter()
            .map(|&m| {
                let mut plan = self.fixed_allocations;
                plan.stage_mut(self.product)[usize::from(m) - 1] += self.residual_share;
                (Some(m), None, plan)
            })
            .collect()
    }
}

/// The fourteen marketing cases.
///
/// Cases 1–11 sell the whole harvest as one product to one market. Cases 12
/// and 13 send 70% to the Grower Association and try the remaining 30% at
/// each other market that buys the product. Case 14 splits fresh cherries
/// between Local Traders and Other Markets.
pub fn builtin_cases() -> Vec<CaseSpec> {
    const NAMES: [&str; 5] = [
        "Nestle",
        "Local Traders",
        "Grower Association",
        "Direct Selling",
        "Other Markets",
    ];
    let mut cases = Vec::with_capacity(14);
    let singles: [(Product, &[u8]); 3] = [
        (Product::Fc, &[2, 5]),
        (Product::Dc, &[2, 3, 4, 5]),
        (Product::Gcb, &[1, 2, 3, 4, 5]),
    ];
    for (product, markets) in singles {
        for &m in markets {
            let id = cases.len() as u32 + 1;
            cases.push(CaseSpec::vertex(id, product, m, NAMES[usize::from(m) - 1]));
        }
    }
    cases.push(CaseSpec::association_rule(12, Product::Dc, vec![2, 4, 5]));
    cases.push(CaseSpec::association_rule(13, Product::Gcb, vec![1, 2, 4, 5]));
    cases.push(CaseSpec {
        id: 14,
        product: Product::Fc,
        description: "FC split between Local Traders (x) and Other Markets (1 - x)".into(),
        fixed_allocations: AllocationPlan::zero(),
        residual_markets: Vec::new(),
        residual_share: 0.0,
        split_axis: Some(SplitAxis { first: 2, second: 5 }),
    });
    cases
}

/// One evaluated plan of a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub case_id: u32,
    pub label: String,
    pub residual_market: Option<u8>,
    pub x: Option<f64>,
    pub plan: AllocationPlan,
    pub result: ScenarioResult,
}

pub fn run_case(id: u32, config: &ModelConfig) -> Result<Vec<CaseOutcome>> {
    let case = builtin_cases()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or(ScenarioError::UnknownCase(id))?;
    case.plans(config.engine.grid_step)
        .into_iter()
        .map(|(residual_market, x, plan)| {
            let label = match (residual_market, x) {
                (Some(m), _) => format!("case_{id}_residual_{m}"),
                (None, Some(x)) => format!("case_{id}_x_{x:.2}"),
                (None, None) => format!("case_{id}"),
            };
            Ok(CaseOutcome {
                case_id: id,
                label,
                residual_market,
                x,
                plan,
                result: config.evaluate(&plan)?,
            })
        })
        .collect()
}
