//! Side-by-side comparison of published headline figures with values
//! recomputed from the embedded tables under both cost bases.

use serde::{Deserialize, Serialize};

use super::breakeven::{breakeven_price, MarketSelection};
use super::cases::run_case;
use super::{Result, ScenarioError};
use crate::config::ModelConfig;
use crate::model::{Activity, AllocationPlan, CostBasis, Product};
use crate::report::{currency, fixed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationRow {
    pub label: String,
    pub unit: String,
    pub published_value: f64,
    pub computed_all_trees: Option<f64>,
    pub computed_bearing_trees: Option<f64>,
    /// `(computed - published) / |published|`.
    pub deviation_all_trees: Option<f64>,
    pub deviation_bearing_trees: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationReport {
    pub rows: Vec<ReconciliationRow>,
}

/// One tracked figure and how to recompute it.
struct Tracked {
    label: &'static str,
    unit: &'static str,
    published: f64,
    compute: fn(&ModelConfig) -> Result<Option<f64>>,
}

const GCB_TO_NESTLE: fn() -> AllocationPlan = || AllocationPlan::vertex(Product::Gcb, 1);

fn case_profits(id: u32, config: &ModelConfig) -> Result<Vec<f64>> {
    Ok(run_case(id, config)?.into_iter().map(|o| o.result.profit).collect())
}

/// Profit of the Case 14 split with `x` of fresh cherries to Local Traders.
fn split_profit(x: f64, config: &ModelConfig) -> Result<f64> {
    let mut plan = AllocationPlan::zero();
    plan.beta[1] = x;
    plan.beta[4] = 1.0 - x;
    Ok(config.evaluate(&plan)?.profit)
}

const TRACKED: [Tracked; 8] = [
    Tracked {
        label: "Case 1 profit (all FC to Local Traders)",
        unit: "Php",
        published: 47_590.00,
        compute: |c| Ok(Some(case_profits(1, c)?[0])),
    },
    Tracked {
        label: "Mean profit of all-DC Cases 3-6",
        unit: "Php",
        published: 43_883.85,
        compute: |c| {
            let mut total = 0.0;
            for id in 3..=6 {
                total += case_profits(id, c)?[0];
            }
            Ok(Some(total / 4.0))
        },
    },
    Tracked {
        label: "Case 12 best profit (70% DC to association)",
        unit: "Php",
        published: 46_550.71,
        compute: |c| Ok(case_profits(12, c)?.into_iter().reduce(f64::max)),
    },
    Tracked {
        label: "Minimum GCB price for positive profit (GCB to Nestle)",
        unit: "Php/kg",
        published: 77.00,
        compute: |c| Ok(breakeven_price(Product::Gcb, MarketSelection::Single(1), c, &GCB_TO_NESTLE())?.value()),
    },
    Tracked {
        label: "Profit at GCB price 77.00 (GCB to Nestle)",
        unit: "Php",
        published: 314.67,
        compute: |c| {
            let mut cfg = c.clone();
            cfg.markets.get_mut(1).expect("market 1").price_gcb = 77.0;
            Ok(Some(cfg.evaluate(&GCB_TO_NESTLE())?.profit))
        },
    },
    Tracked {
        label: "Profit at dehulling cost 2.00 (GCB to Nestle)",
        unit: "Php",
        published: 46.11,
        compute: |c| {
            let mut cfg = c.clone();
            cfg.costs.set(Activity::Dehulling, 2.0);
            Ok(Some(cfg.evaluate(&GCB_TO_NESTLE())?.profit))
        },
    },
    Tracked {
        label: "Case 14 profit at smallest positive share to Local Traders",
        unit: "Php",
        published: 2_130.19,
        compute: |c| {
            let profits = run_case(14, c)?;
            Ok(profits
                .iter()
                .map(|o| o.result.profit)
                .find(|&p| p > 0.0))
        },
    },
    Tracked {
        label: "Case 14 profit with 90% to Other Markets",
        unit: "Php",
        published: -83.41,
        compute: |c| Ok(Some(split_profit(0.10, c)?)),
    },
];

fn deviation(computed: Option<f64>, published: f64) -> Option<f64> {
    computed.map(|v| (v - published) / published.abs())
}

/// Recomputes every tracked figure under both cost bases. Never asserts agreement.
pub fn reconcile_published_figures(config: &ModelConfig) -> Result<ReconciliationReport> {
    let all_trees = config.with_basis(CostBasis::AllTrees);
    let bearing = config.with_basis(CostBasis::BearingTrees);
    let rows = TRACKED
        .iter()
        .map(|t| {
            let computed_all_trees = (t.compute)(&all_trees)?;
            let computed_bearing_trees = (t.compute)(&bearing)?;
            Ok::<_, ScenarioError>(ReconciliationRow {
                label: t.label.to_string(),
                unit: t.unit.to_string(),
                published_value: t.published,
                computed_all_trees,
                computed_bearing_trees,
                deviation_all_trees: deviation(computed_all_trees, t.published),
                deviation_bearing_trees: deviation(computed_bearing_trees, t.published),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReconciliationReport { rows })
}

impl ReconciliationReport {
    pub fn row(&self, label_prefix: &str) -> Option<&ReconciliationRow> {
        self.rows.iter().find(|r| r.label.starts_with(label_prefix))
    }

    /// CSV rendering: values to 2 decimals, deviations as fractions to 4 decimals.
    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            "label",
            "unit",
            "published",
            "computed_all_trees",
            "computed_bearing_trees",
            "deviation_all_trees",
            "deviation_bearing_trees",
        ])?;
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_else(|| "n/a".into());
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                r.unit.clone(),
                currency(r.published_value),
                opt(r.computed_all_trees, currency),
                opt(r.computed_bearing_trees, currency),
                opt(r.deviation_all_trees, |d| fixed(d, 4)),
                opt(r.deviation_bearing_trees, |d| fixed(d, 4)),
            ])?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}
