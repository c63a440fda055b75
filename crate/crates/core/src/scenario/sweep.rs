use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Result, ScenarioError};
use crate::config::ModelConfig;
use crate::model::{validate_market_id, Activity, AllocationPlan, Product};

/// A single input that a sweep or breakeven search varies.
///
/// Written as a dotted path:
///
/// | path             | varies                                                  |
/// |------------------|---------------------------------------------------------|
/// | `beta.2`         | one allocation entry (`beta`, `delta` or `sigma`)       |
/// | `price.gcb.1`    | one outlet's price for a product                        |
/// | `price.gcb`      | that product's price at every outlet that buys it       |
/// | `cost.dehulling` | one per-tree activity cost                              |
/// | `split.fc.2.5`   | share `x` to the first market, `1 - x` to the second    |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SweepTarget {
    Allocation { product: Product, market: u8 },
    Price { product: Product, market: Option<u8> },
    Cost(Activity),
    Split { product: Product, first: u8, second: u8 },
}

impl fmt::Display for SweepTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SweepTarget::Allocation { product, market } => {
                write!(f, "{}.{market}", product.stage())
            }
            SweepTarget::Price {
                product,
                market: Some(m),
            } => write!(f, "price.{}.{m}", product.code()),
            SweepTarget::Price {
                product,
                market: None,
            } => write!(f, "price.{}", product.code()),
            SweepTarget::Cost(activity) => write!(f, "cost.{activity}"),
            SweepTarget::Split {
                product,
                first,
                second,
            } => write!(f, "split.{}.{first}.{second}", product.code()),
        }
    }
}

impl From<SweepTarget> for String {
    fn from(t: SweepTarget) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for SweepTarget {
    type Error = ScenarioError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for SweepTarget {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ScenarioError::Config(format!("unresolvable target path '{s}'"));
        let market = |part: &str| -> Result<u8> {
            let id: u8 = part.parse().map_err(|_| bad())?;
            validate_market_id(id).map_err(|_| bad())?;
            Ok(id)
        };
        let product = |part: &str| part.parse::<Product>().map_err(|_| bad());
        let parts: Vec<&str> = s.split('.').collect();
        match parts.as_slice() {
            [stage @ ("beta" | "delta" | "sigma"), m] => {
                let product = match *stage {
                    "beta" => Product::Fc,
                    "delta" => Product::Dc,
                    _ => Product::Gcb,
                };
                Ok(SweepTarget::Allocation {
                    product,
                    market: market(m)?,
                })
            }
            ["price", p] => Ok(SweepTarget::Price {
                product: product(p)?,
                market: None,
            }),
            ["price", p, m] => Ok(SweepTarget::Price {
                product: product(p)?,
                market: Some(market(m)?),
            }),
            ["cost", a] => Ok(SweepTarget::Cost(a.parse().map_err(|_| bad())?)),
            ["split", p, a, b] => {
                let (first, second) = (market(a)?, market(b)?);
                if first == second {
                    return Err(bad());
                }
                Ok(SweepTarget::Split {
                    product: product(p)?,
                    first,
                    second,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl SweepTarget {
    /// Returns the config and plan with this target set to `x`.
    pub fn apply(
        &self,
        x: f64,
        config: &ModelConfig,
        plan: &AllocationPlan,
    ) -> Result<(ModelConfig, AllocationPlan)> {
        let mut config = config.clone();
        let mut plan = *plan;
        match *self {
            SweepTarget::Allocation { product, market } => {
                plan.stage_mut(product)[usize::from(market) - 1] = x;
            }
            SweepTarget::Price { product, market } => {
                for id in price_markets(&config, product, market)? {
                    config
                        .markets
                        .get_mut(id)
                        .expect("validated id")
                        .set_price(product, x);
                }
            }
            SweepTarget::Cost(activity) => config.costs.set(activity, x),
            SweepTarget::Split {
                product,
                first,
                second,
            } => {
                let stage = plan.stage_mut(product);
                stage[usize::from(first) - 1] = x;
                stage[usize::from(second) - 1] = 1.0 - x;
            }
        }
        Ok((config, plan))
    }

    /// Value of this target in the given config and plan.
    pub fn current(&self, config: &ModelConfig, plan: &AllocationPlan) -> Result<f64> {
        Ok(match *self {
            SweepTarget::Allocation { product, market } => plan.stage(product)[usize::from(market) - 1],
            SweepTarget::Price { product, market } => {
                let id = price_markets(config, product, market)?[0];
                config.markets.get(id).expect("validated id").price(product)
            }
            SweepTarget::Cost(activity) => config.costs.get(activity),
            SweepTarget::Split { product, first, .. } => plan.stage(product)[usize::from(first) - 1],
        })
    }
}

/// Outlets whose `product` price a price target moves. Without an explicit
/// market these are the outlets that buy the product in the base config.
pub(super) fn price_markets(
    config: &ModelConfig,
    product: Product,
    market: Option<u8>,
) -> Result<Vec<u8>> {
    match market {
        Some(id) => {
            validate_market_id(id)?;
            Ok(vec![id])
        }
        None => {
            let ids: Vec<u8> = config
                .markets
                .outlets()
                .iter()
                .filter(|o| o.buys(product))
                .map(|o| o.id)
                .collect();
            if ids.is_empty() {
                Err(ScenarioError::Config(format!(
                    "no market buys {product}; name a market explicitly"
                )))
            } else {
                Ok(ids)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(ScenarioError::Config(format!(
                "sweep range requires lo ≤ hi (got lo={}, hi={})",
                self.lo, self.hi
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(ScenarioError::Config(format!(
                "sweep step must be positive (got {})",
                self.step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub profit: f64,
    pub revenue_total: f64,
    pub cost_total: f64,
    pub fc_kg: f64,
    pub dc_kg: f64,
    pub gcb_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub target: SweepTarget,
    pub points: Vec<SweepPoint>,
}

impl SweepSeries {
    /// First grid point with strictly positive profit.
    pub fn first_positive(&self) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.profit > 0.0)
    }
}

/// Grid `lo, lo + step, …` up to `hi`. Points are `lo + k·step`, so they do
/// not accumulate rounding error; `hi` is included when it lies on the grid.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Evaluates `plan` at every grid point of `spec`, varying only its target.
pub fn sweep(spec: &SweepSpec, config: &ModelConfig, plan: &AllocationPlan) -> Result<SweepSeries> {
    spec.validate()?;
    let points = grid(spec.lo, spec.hi, spec.step)
        .into_iter()
        .map(|x| {
            let (cfg, p) = spec.target.apply(x, config, plan)?;
            let r = cfg.evaluate(&p)?;
            Ok(SweepPoint {
                x,
                profit: r.profit,
                revenue_total: r.revenue_total,
                cost_total: r.cost_total,
                fc_kg: r.sellable.total(Product::Fc),
                dc_kg: r.sellable.total(Product::Dc),
                gcb_kg: r.sellable.total(Product::Gcb),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSeries {
        target: spec.target,
        points,
    })
}
