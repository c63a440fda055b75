//! Test-only helpers: a straight-line profit oracle that does not call into
//! the crate, and proptest strategies for random inputs.

#![allow(dead_code)]

use beanledger_core::model::MARKET_COUNT;
use beanledger_core::{AllocationPlan, CostBasis, ModelConfig, Product};
use proptest::prelude::*;

/// Raw numbers of one farm, as they would sit in a spreadsheet.
#[derive(Debug, Clone)]
pub struct Sheet {
    pub yield_per_tree: f64,
    pub trees: f64,
    pub bearing: f64,
    pub damage: f64,
    pub area: f64,
    pub dc_rate: f64,
    pub gcb_rate: f64,
    pub base_costs: [f64; 7],
    pub drying: f64,
    pub dehulling: f64,
    pub bearing_basis: bool,
    pub fc: [f64; 5],
    pub dc: [f64; 5],
    pub gcb: [f64; 5],
}

impl Sheet {
    /// The Sultan Kudarat farm, prices and costs, typed in by hand.
    pub fn sultan_kudarat() -> Sheet {
        Sheet {
            yield_per_tree: 2.7723,
            trees: 1025.0,
            bearing: 0.80,
            damage: 0.05,
            area: 1.0,
            dc_rate: 0.45,
            gcb_rate: 0.20,
            base_costs: [0.86, 1.20, 2.38, 3.38, 5.98, 2.35, 15.20],
            drying: 0.56,
            dehulling: 2.51,
            bearing_basis: false,
            fc: [0.0, 32.5, 0.0, 0.0, 12.0],
            dc: [0.0, 70.7, 75.0, 72.96, 75.0],
            gcb: [75.41, 69.7, 74.5, 70.24, 70.12],
        }
    }

    pub fn from_config(c: &ModelConfig) -> Sheet {
        let s = c.schedule();
        let price = |p: Product| std::array::from_fn(|i| c.markets.outlets()[i].price(p));
        Sheet {
            yield_per_tree: c.farm.yield_per_tree,
            trees: c.farm.trees_per_ha,
            bearing: c.farm.bearing_fraction,
            damage: c.farm.damage_rate,
            area: c.farm.land_area,
            dc_rate: c.rates.fc_to_dc,
            gcb_rate: c.rates.fc_to_gcb,
            base_costs: [
                s.fertilizer,
                s.fertilizer_application,
                s.pruning,
                s.weeding,
                s.harvesting,
                s.transportation,
                s.gap,
            ],
            drying: s.drying,
            dehulling: s.dehulling,
            bearing_basis: s.cost_basis == CostBasis::BearingTrees,
            fc: price(Product::Fc),
            dc: price(Product::Dc),
            gcb: price(Product::Gcb),
        }
    }

    pub fn harvest(&self) -> f64 {
        self.yield_per_tree * self.trees * self.bearing * (1.0 - self.damage) * self.area
    }

    /// Profit when `shares[p][m]` of the harvest goes to market `m` as product `p`.
    #[allow(clippy::needless_range_loop)]
    pub fn profit_from_shares(&self, shares: &[[f64; 5]; 3]) -> f64 {
        let c = self.harvest();
        let trees = if self.bearing_basis {
            self.trees * self.bearing * self.area
        } else {
            self.trees * self.area
        };
        let mut revenue = 0.0;
        for m in 0..5 {
            revenue += shares[0][m] * c * self.fc[m];
            revenue += shares[1][m] * c * self.dc_rate * self.dc[m];
            revenue += shares[2][m] * c * self.gcb_rate * self.gcb[m];
        }
        let dc_share: f64 = shares[1].iter().sum();
        let gcb_share: f64 = shares[2].iter().sum();
        let base: f64 = self.base_costs.iter().sum();
        let cost = base * trees
            + self.drying * trees * (dc_share + gcb_share)
            + self.dehulling * trees * gcb_share;
        revenue - cost
    }

    pub fn profit(&self, plan: &AllocationPlan) -> f64 {
        let fc = plan.beta;
        let left = 1.0 - fc.iter().sum::<f64>();
        let dc: [f64; 5] = std::array::from_fn(|i| plan.delta[i] * left);
        let left = left - dc.iter().sum::<f64>();
        let gcb: [f64; 5] = std::array::from_fn(|i| plan.sigma[i] * left);
        self.profit_from_shares(&[fc, dc, gcb])
    }
}

/// Five fractions summing to at most one.
pub fn stage_fractions() -> impl Strategy<Value = [f64; 5]> {
    (prop::array::uniform5(0.0f64..1.0), 0.0f64..=1.0, any::<bool>()).prop_map(|(w, total, sparse)| {
        let mut w = w;
        if sparse {
            // Keep only the largest weight, which exercises vertex-like plans.
            let (idx, _) = w
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            w = std::array::from_fn(|i| if i == idx { 1.0 } else { 0.0 });
        }
        let sum: f64 = w.iter().sum();
        if sum == 0.0 {
            [0.0; 5]
        } else {
            w.map(|v| v / sum * total)
        }
    })
}

pub fn plan() -> impl Strategy<Value = AllocationPlan> {
    (stage_fractions(), stage_fractions(), stage_fractions())
        .prop_map(|(beta, delta, sigma)| AllocationPlan { beta, delta, sigma })
}

fn price() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 4 => 0.0f64..150.0]
}

/// A valid configuration with every number drawn at random.
pub fn config() -> impl Strategy<Value = ModelConfig> {
    let farm = (0.0f64..10.0, 0u32..3000, 0.0f64..=1.0, 0.0f64..=1.0, 0.1f64..20.0);
    let rates = (0.05f64..=1.0, 0.01f64..=1.0);
    let costs = (prop::array::uniform9(0.0f64..40.0), any::<bool>());
    let prices = (
        prop::array::uniform5(price()),
        prop::array::uniform5(price()),
        prop::array::uniform5(price()),
    );
    (farm, rates, costs, prices).prop_map(|(farm, rates, (costs, bearing), (fc, dc, gcb))| {
        let mut cfg = beanledger_core::default_config();
        cfg.farm.yield_per_tree = farm.0;
        cfg.farm.trees_per_ha = f64::from(farm.1);
        cfg.farm.bearing_fraction = farm.2;
        cfg.farm.damage_rate = farm.3;
        cfg.farm.land_area = farm.4;
        cfg.rates.fc_to_dc = rates.0;
        cfg.rates.fc_to_gcb = rates.1 * rates.0;
        for (activity, value) in beanledger_core::Activity::ALL.into_iter().zip(costs) {
            cfg.costs.set(activity, value);
        }
        cfg.costs.cost_basis = if bearing {
            CostBasis::BearingTrees
        } else {
            CostBasis::AllTrees
        };
        for id in 1..=MARKET_COUNT as u8 {
            let o = cfg.markets.get_mut(id).unwrap();
            let i = usize::from(id) - 1;
            o.price_fc = fc[i];
            o.price_dc = dc[i];
            o.price_gcb = gcb[i];
        }
        cfg
    })
}

/// `|a - b| ≤ rel · max(1, |a|, |b|)`.
pub fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}
