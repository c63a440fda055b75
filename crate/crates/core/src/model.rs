//! Farm-gate profit model.
//!
//! Harvest is computed from agronomic parameters, split across the three
//! products through a sequential allocation cascade (fresh cherries first,
//! then drying, then dehulling of what remains), converted to sellable
//! mass, priced per market outlet and charged per-tree activity costs.
//!
//! Every function here is pure. Inputs are validated on entry and never
//! mutated, so results are safe to compute concurrently.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of market outlets.
pub const MARKET_COUNT: usize = 5;

/// Slack allowed when checking that allocation fractions sum to at most one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// One value per market outlet, indexed by `id - 1`.
pub type PerMarket = [f64; MARKET_COUNT];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} {reason}")]
    Invalid { field: String, reason: String },
    #[error("{stage} sums to {sum} > 1")]
    InfeasiblePlan { stage: Stage, sum: f64 },
}

impl ModelError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    fn out_of_range(field: impl Into<String>, bound: &str, value: f64) -> Self {
        ModelError::invalid(field, format!("∉ {bound} (got {value})"))
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

fn check_unit(field: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::out_of_range(field, "[0,1]", value))
    }
}

fn check_non_negative(field: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::out_of_range(field, "[0,∞)", value))
    }
}

/// Allocation stage of the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Beta,
    Delta,
    Sigma,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Beta => "beta",
            Stage::Delta => "delta",
            Stage::Sigma => "sigma",
        })
    }
}

/// Coffee product sold at the farm gate. Ordering is FC < DC < GCB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Product {
    /// Fresh cherries.
    #[serde(rename = "FC")]
    Fc,
    /// Sun-dried whole cherries.
    #[serde(rename = "DC")]
    Dc,
    /// Green coffee beans, dehulled from dried cherries.
    #[serde(rename = "GCB")]
    Gcb,
}

impl Product {
    pub const ALL: [Product; 3] = [Product::Fc, Product::Dc, Product::Gcb];

    pub fn stage(self) -> Stage {
        match self {
            Product::Fc => Stage::Beta,
            Product::Dc => Stage::Delta,
            Product::Gcb => Stage::Sigma,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Product::Fc => "fc",
            Product::Dc => "dc",
            Product::Gcb => "gcb",
        }
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Product::Fc => "FC",
            Product::Dc => "DC",
            Product::Gcb => "GCB",
        })
    }
}

impl FromStr for Product {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fc" => Ok(Product::Fc),
            "dc" => Ok(Product::Dc),
            "gcb" => Ok(Product::Gcb),
            _ => Err(ModelError::invalid("product", format!("unknown product '{s}'"))),
        }
    }
}

/// Which trees per-tree activity costs are charged on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CostBasis {
    #[default]
    AllTrees,
    BearingTrees,
}

/// Agronomic inputs of the harvest equation for one model farm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarmParameters {
    /// Fresh-cherry yield, kg per tree per year.
    pub yield_per_tree: f64,
    /// Planted trees per hectare.
    pub trees_per_ha: f64,
    /// Fraction of planted trees currently bearing.
    pub bearing_fraction: f64,
    /// Fraction of cherries lost during harvest.
    pub damage_rate: f64,
    /// Farm size in hectares.
    pub land_area: f64,
}

impl FarmParameters {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("yield_per_tree", self.yield_per_tree)?;
        check_non_negative("trees_per_ha", self.trees_per_ha)?;
        if self.trees_per_ha.fract() != 0.0 {
            return Err(ModelError::invalid(
                "trees_per_ha",
                format!("must be integer-valued (got {})", self.trees_per_ha),
            ));
        }
        check_unit("bearing_fraction", self.bearing_fraction)?;
        check_unit("damage_rate", self.damage_rate)?;
        if !(self.land_area > 0.0 && self.land_area.is_finite()) {
            return Err(ModelError::out_of_range("land_area", "(0,∞)", self.land_area));
        }
        Ok(())
    }

    /// Trees that per-tree costs are charged on under `basis`.
    pub fn tree_count(&self, basis: CostBasis) -> f64 {
        match basis {
            CostBasis::AllTrees => self.trees_per_ha * self.land_area,
            CostBasis::BearingTrees => self.trees_per_ha * self.bearing_fraction * self.land_area,
        }
    }
}

/// Mass yield of each processed product per kg of fresh cherries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConversionRates {
    pub fc_to_dc: f64,
    pub fc_to_gcb: f64,
}

impl ConversionRates {
    pub fn validate(&self) -> Result<()> {
        check_unit("fc_to_dc", self.fc_to_dc)?;
        if !(self.fc_to_gcb > 0.0 && self.fc_to_gcb <= self.fc_to_dc) {
            return Err(ModelError::out_of_range(
                "fc_to_gcb",
                &format!("(0,fc_to_dc={}]", self.fc_to_dc),
                self.fc_to_gcb,
            ));
        }
        Ok(())
    }
}

/// Per-tree activity whose cost appears in the [`CostSchedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Fertilizer,
    FertilizerApplication,
    Pruning,
    Weeding,
    Harvesting,
    Transportation,
    Gap,
    Drying,
    Dehulling,
}

impl Activity {
    pub const ALL: [Activity; 9] = [
        Activity::Fertilizer,
        Activity::FertilizerApplication,
        Activity::Pruning,
        Activity::Weeding,
        Activity::Harvesting,
        Activity::Transportation,
        Activity::Gap,
        Activity::Drying,
        Activity::Dehulling,
    ];

    /// Activities incurred on every tree regardless of what is sold.
    pub const BASE: [Activity; 7] = [
        Activity::Fertilizer,
        Activity::FertilizerApplication,
        Activity::Pruning,
        Activity::Weeding,
        Activity::Harvesting,
        Activity::Transportation,
        Activity::Gap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activity::Fertilizer => "fertilizer",
            Activity::FertilizerApplication => "fertilizer_application",
            Activity::Pruning => "pruning",
            Activity::Weeding => "weeding",
            Activity::Harvesting => "harvesting",
            Activity::Transportation => "transportation",
            Activity::Gap => "gap",
            Activity::Drying => "drying",
            Activity::Dehulling => "dehulling",
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activity {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Activity::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ModelError::invalid("activity", format!("unknown activity '{s}'")))
    }
}

/// Standard deviations of the activity costs. Carried along, never computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivitySd {
    pub fertilizer: f64,
    pub fertilizer_application: f64,
    pub pruning: f64,
    pub weeding: f64,
    pub harvesting: f64,
    pub transportation: f64,
    pub gap: f64,
    pub drying: f64,
    pub dehulling: f64,
}

/// Annual activity costs in Php per tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSchedule {
    pub fertilizer: f64,
    pub fertilizer_application: f64,
    pub pruning: f64,
    pub weeding: f64,
    pub harvesting: f64,
    pub transportation: f64,
    pub gap: f64,
    pub drying: f64,
    pub dehulling: f64,
    pub cost_basis: CostBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd_per_activity: Option<ActivitySd>,
}

impl CostSchedule {
    pub fn get(&self, activity: Activity) -> f64 {
        match activity {
            Activity::Fertilizer => self.fertilizer,
            Activity::FertilizerApplication => self.fertilizer_application,
            Activity::Pruning => self.pruning,
            Activity::Weeding => self.weeding,
            Activity::Harvesting => self.harvesting,
            Activity::Transportation => self.transportation,
            Activity::Gap => self.gap,
            Activity::Drying => self.drying,
            Activity::Dehulling => self.dehulling,
        }
    }

    pub fn set(&mut self, activity: Activity, value: f64) {
        let slot = match activity {
            Activity::Fertilizer => &mut self.fertilizer,
            Activity::FertilizerApplication => &mut self.fertilizer_application,
            Activity::Pruning => &mut self.pruning,
            Activity::Weeding => &mut self.weeding,
            Activity::Harvesting => &mut self.harvesting,
            Activity::Transportation => &mut self.transportation,
            Activity::Gap => &mut self.gap,
            Activity::Drying => &mut self.drying,
            Activity::Dehulling => &mut self.dehulling,
        };
        *slot = value;
    }

    /// Sum of the seven activities needed to bring fresh cherries to market.
    pub fn base_fc_cost_per_tree(&self) -> f64 {
        Activity::BASE.iter().map(|&a| self.get(a)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for activity in Activity::ALL {
            check_non_negative(activity.name(), self.get(activity))?;
        }
        Ok(())
    }
}

/// Price standard deviations for one outlet. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSd {
    pub fc: f64,
    pub dc: f64,
    pub gcb: f64,
}

/// A buyer channel. A price of 0 means the outlet does not buy that product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketOutlet {
    pub id: u8,
    pub name: String,
    pub price_fc: f64,
    pub price_dc: f64,
    pub price_gcb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_sd: Option<PriceSd>,
}

impl MarketOutlet {
    pub fn price(&self, product: Product) -> f64 {
        match product {
            Product::Fc => self.price_fc,
            Product::Dc => self.price_dc,
            Product::Gcb => self.price_gcb,
        }
    }

    pub fn set_price(&mut self, product: Product, value: f64) {
        match product {
            Product::Fc => self.price_fc = value,
            Product::Dc => self.price_dc = value,
            Product::Gcb => self.price_gcb = value,
        }
    }

    pub fn buys(&self, product: Product) -> bool {
        self.price(product) > 0.0
    }
}

/// The five outlets, ordered by id 1..=5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarketSet {
    outlets: Vec<MarketOutlet>,
}

impl MarketSet {
    pub fn new(outlets: Vec<MarketOutlet>) -> Result<Self> {
        let set = MarketSet { outlets };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outlets.len() != MARKET_COUNT {
            return Err(ModelError::invalid(
                "markets",
                format!("must list exactly {MARKET_COUNT} outlets (got {})", self.outlets.len()),
            ));
        }
        for (idx, outlet) in self.outlets.iter().enumerate() {
            if usize::from(outlet.id) != idx + 1 {
                return Err(ModelError::invalid(
                    "markets",
                    format!("ids must be 1..={MARKET_COUNT} in order (position {} has id {})", idx + 1, outlet.id),
                ));
            }
            for product in Product::ALL {
                check_non_negative(
                    &format!("markets[{}].price_{}", outlet.id, product.code()),
                    outlet.price(product),
                )?;
            }
        }
        Ok(())
    }

    pub fn outlets(&self) -> &[MarketOutlet] {
        &self.outlets
    }

    /// Outlet by id, `None` when outside 1..=5.
    pub fn get(&self, id: u8) -> Option<&MarketOutlet> {
        (1..=MARKET_COUNT as u8).contains(&id).then(|| &self.outlets[usize::from(id) - 1])
    }

    pub fn get_mut(&mut self, id: u8) -> Option<&mut MarketOutlet> {
        (1..=MARKET_COUNT as u8)
            .contains(&id)
            .then(|| &mut self.outlets[usize::from(id) - 1])
    }

    pub fn prices(&self, product: Product) -> PerMarket {
        std::array::from_fn(|i| self.outlets[i].price(product))
    }

    pub fn max_price(&self) -> f64 {
        self.outlets
            .iter()
            .flat_map(|o| Product::ALL.map(|p| o.price(p)))
            .fold(0.0, f64::max)
    }

    /// Multiplies every price by `factor`.
    pub fn scaled(&self, factor: f64) -> MarketSet {
        let mut out = self.clone();
        for outlet in &mut out.outlets {
            for product in Product::ALL {
                outlet.set_price(product, outlet.price(product) * factor);
            }
        }
        out
    }
}

pub(crate) fn validate_market_id(id: u8) -> Result<()> {
    if (1..=MARKET_COUNT as u8).contains(&id) {
        Ok(())
    } else {
        Err(ModelError::invalid(
            "market",
            format!("id {id} ∉ [1,{MARKET_COUNT}]"),
        ))
    }
}

/// Fractions routed to each market at each cascade stage.
///
/// `beta` splits the harvest, `delta` splits what is left after fresh
/// sales, `sigma` splits what is left after drying.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationPlan {
    #[serde(default)]
    pub beta: PerMarket,
    #[serde(default)]
    pub delta: PerMarket,
    #[serde(default)]
    pub sigma: PerMarket,
}

impl AllocationPlan {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sends the whole harvest to one market as one product.
    pub fn vertex(product: Product, market: u8) -> Self {
        let mut plan = Self::zero();
        plan.stage_mut(product)[usize::from(market) - 1] = 1.0;
        plan
    }

    pub fn stage(&self, product: Product) -> &PerMarket {
        match product {
            Product::Fc => &self.beta,
            Product::Dc => &self.delta,
            Product::Gcb => &self.sigma,
        }
    }

    pub fn stage_mut(&mut self, product: Product) -> &mut PerMarket {
        match product {
            Product::Fc => &mut self.beta,
            Product::Dc => &mut self.delta,
            Product::Gcb => &mut self.sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for product in Product::ALL {
            let stage = product.stage();
            for (i, &v) in self.stage(product).iter().enumerate() {
                check_unit(&format!("{stage}[{}]", i + 1), v)?;
            }
            let sum: f64 = self.stage(product).iter().sum();
            if sum > 1.0 + SUM_TOLERANCE {
                return Err(ModelError::InfeasiblePlan { stage, sum });
            }
        }
        Ok(())
    }

    /// Fraction of the harvest that ends up at each (product, market).
    pub fn shares(&self) -> [PerMarket; 3] {
        let fc = self.beta;
        let after_fc = (1.0 - fc.iter().sum::<f64>()).max(0.0);
        let dc = self.delta.map(|d| d * after_fc);
        let after_dc = (after_fc - dc.iter().sum::<f64>()).max(0.0);
        let gcb = self.sigma.map(|s| s * after_dc);
        [fc, dc, gcb]
    }

    /// Inverse of [`shares`](Self::shares): builds the cascade fractions that
    /// route the given harvest shares. Shares must be non-negative and sum to at most one.
    pub fn from_shares(shares: &[PerMarket; 3]) -> Self {
        let beta = shares[0];
        let after_fc = (1.0 - beta.iter().sum::<f64>()).max(0.0);
        let delta = shares[1].map(|s| if after_fc > 0.0 { (s / after_fc).min(1.0) } else { 0.0 });
        let after_dc = (after_fc - shares[1].iter().sum::<f64>()).max(0.0);
        let sigma = shares[2].map(|s| if after_dc > 0.0 { (s / after_dc).min(1.0) } else { 0.0 });
        AllocationPlan { beta, delta, sigma }
    }
}

/// Fresh-cherry mass at every point of the allocation cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductFlows {
    pub harvest_kg: f64,
    pub fc_to_market: PerMarket,
    pub remaining_after_fc: f64,
    /// Fresh-cherry mass sent to drying, per destination market.
    pub dc_raw_to_market: PerMarket,
    pub remaining_after_dc: f64,
    /// Fresh-cherry mass sent to drying and dehulling, per destination market.
    pub gcb_raw_to_market: PerMarket,
    pub unsold_kg: f64,
}

impl ProductFlows {
    pub fn total_fc(&self) -> f64 {
        self.fc_to_market.iter().sum()
    }

    pub fn total_dc_raw(&self) -> f64 {
        self.dc_raw_to_market.iter().sum()
    }

    pub fn total_gcb_raw(&self) -> f64 {
        self.gcb_raw_to_market.iter().sum()
    }
}

/// Mass each market receives after drying and dehulling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellableMasses {
    pub fc: PerMarket,
    pub dc: PerMarket,
    pub gcb: PerMarket,
}

impl SellableMasses {
    pub fn of(&self, product: Product) -> &PerMarket {
        match product {
            Product::Fc => &self.fc,
            Product::Dc => &self.dc,
            Product::Gcb => &self.gcb,
        }
    }

    pub fn total(&self, product: Product) -> f64 {
        self.of(product).iter().sum()
    }
}

/// Annual cost per activity in Php.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub tree_count: f64,
    pub fertilizer: f64,
    pub fertilizer_application: f64,
    pub pruning: f64,
    pub weeding: f64,
    pub harvesting: f64,
    pub transportation: f64,
    pub gap: f64,
    pub drying: f64,
    pub dehulling: f64,
}

impl CostBreakdown {
    pub fn get(&self, activity: Activity) -> f64 {
        match activity {
            Activity::Fertilizer => self.fertilizer,
            Activity::FertilizerApplication => self.fertilizer_application,
            Activity::Pruning => self.pruning,
            Activity::Weeding => self.weeding,
            Activity::Harvesting => self.harvesting,
            Activity::Transportation => self.transportation,
            Activity::Gap => self.gap,
            Activity::Drying => self.drying,
            Activity::Dehulling => self.dehulling,
        }
    }

    pub fn total(&self) -> f64 {
        Activity::ALL.iter().map(|&a| self.get(a)).sum()
    }
}

/// Non-fatal findings raised while evaluating a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Mass was routed to an outlet that does not buy the product.
    WastedAllocation {
        product: Product,
        market_id: u8,
        mass_kg: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::WastedAllocation {
                product,
                market_id,
                mass_kg,
            } => write!(
                f,
                "wasted allocation: {mass_kg:.4} kg of {product} routed to market {market_id}, which does not buy it"
            ),
        }
    }
}

/// Revenue of one evaluated plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Revenue {
    pub by_market: PerMarket,
    pub total: f64,
    pub warnings: Vec<Warning>,
}

/// Everything that went into an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub farm: FarmParameters,
    pub plan: AllocationPlan,
    pub markets: MarketSet,
    pub costs: CostSchedule,
    pub rates: ConversionRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub flows: ProductFlows,
    pub sellable: SellableMasses,
    pub revenue_by_market: PerMarket,
    pub revenue_total: f64,
    pub cost_breakdown: CostBreakdown,
    pub cost_total: f64,
    pub profit: f64,
    pub warnings: Vec<Warning>,
    pub config_echo: ScenarioInputs,
}

/// Fresh cherries harvested in one annual cycle, in kg.
pub fn compute_harvest(params: &FarmParameters) -> Result<f64> {
    params.validate()?;
    Ok(params.yield_per_tree
        * params.trees_per_ha
        * params.bearing_fraction
        * (1.0 - params.damage_rate)
        * params.land_area)
}

/// Runs the allocation cascade over `harvest_kg` kilograms of fresh cherries.
pub fn cascade_allocate(harvest_kg: f64, plan: &AllocationPlan) -> Result<ProductFlows> {
    check_non_negative("harvest_kg", harvest_kg)?;
    plan.validate()?;

    let fc_to_market = plan.beta.map(|b| b * harvest_kg);
    let remaining_after_fc = (harvest_kg - fc_to_market.iter().sum::<f64>()).max(0.0);
    let dc_raw_to_market = plan.delta.map(|d| d * remaining_after_fc);
    let remaining_after_dc = (remaining_after_fc - dc_raw_to_market.iter().sum::<f64>()).max(0.0);
    let gcb_raw_to_market = plan.sigma.map(|s| s * remaining_after_dc);
    let unsold_kg = (remaining_after_dc - gcb_raw_to_market.iter().sum::<f64>()).max(0.0);

    Ok(ProductFlows {
        harvest_kg,
        fc_to_market,
        remaining_after_fc,
        dc_raw_to_market,
        remaining_after_dc,
        gcb_raw_to_market,
        unsold_kg,
    })
}

pub fn apply_conversion(flows: &ProductFlows, rates: &ConversionRates) -> Result<SellableMasses> {
    rates.validate()?;
    Ok(SellableMasses {
        fc: flows.fc_to_market,
        dc: flows.dc_raw_to_market.map(|d| d * rates.fc_to_dc),
        gcb: flows.gcb_raw_to_market.map(|g| g * rates.fc_to_gcb),
    })
}

pub fn compute_revenue(sellable: &SellableMasses, markets: &MarketSet) -> Result<Revenue> {
    markets.validate()?;
    let mut warnings = Vec::new();
    let mut by_market = [0.0; MARKET_COUNT];
    for (i, outlet) in markets.outlets().iter().enumerate() {
        let mut revenue = 0.0;
        for product in Product::ALL {
            let mass = sellable.of(product)[i];
            let price = outlet.price(product);
            if mass > 0.0 && price == 0.0 {
                warnings.push(Warning::WastedAllocation {
                    product,
                    market_id: outlet.id,
                    mass_kg: mass,
                });
            }
            revenue += price * mass;
        }
        by_market[i] = revenue;
    }
    let total = by_market.iter().sum();
    Ok(Revenue {
        by_market,
        total,
        warnings,
    })
}

/// Annual cost of the plan described by `flows`.
///
/// The seven base activities are always paid on every charged tree. Drying
/// and dehulling are prorated by the share of the harvest that goes through
/// each process; green beans are dried before dehulling, so they count
/// towards both.
pub fn compute_cost(
    params: &FarmParameters,
    flows: &ProductFlows,
    schedule: &CostSchedule,
) -> Result<CostBreakdown> {
    params.validate()?;
    schedule.validate()?;
    let trees = params.tree_count(schedule.cost_basis);
    let harvest = flows.harvest_kg;
    let (dried, dehulled) = if harvest > 0.0 {
        let gcb = flows.total_gcb_raw();
        ((flows.total_dc_raw() + gcb) / harvest, gcb / harvest)
    } else {
        (0.0, 0.0)
    };
    let base = |a: Activity| schedule.get(a) * trees;
    Ok(CostBreakdown {
        tree_count: trees,
        fertilizer: base(Activity::Fertilizer),
        fertilizer_application: base(Activity::FertilizerApplication),
        pruning: base(Activity::Pruning),
        weeding: base(Activity::Weeding),
        harvesting: base(Activity::Harvesting),
        transportation: base(Activity::Transportation),
        gap: base(Activity::Gap),
        drying: schedule.drying * trees * dried,
        dehulling: schedule.dehulling * trees * dehulled,
    })
}

/// Harvest, allocate, convert, sell and cost one plan.
pub fn evaluate_scenario(
    farm: &FarmParameters,
    plan: &AllocationPlan,
    markets: &MarketSet,
    costs: &CostSchedule,
    rates: &ConversionRates,
) -> Result<ScenarioResult> {
    let harvest = compute_harvest(farm)?;
    let flows = cascade_allocate(harvest, plan)?;
    let sellable = apply_conversion(&flows, rates)?;
    let revenue = compute_revenue(&sellable, markets)?;
    let cost_breakdown = compute_cost(farm, &flows, costs)?;
    let cost_total = cost_breakdown.total();
    Ok(ScenarioResult {
        flows,
        sellable,
        revenue_by_market: revenue.by_market,
        revenue_total: revenue.total,
        cost_breakdown,
        cost_total,
        profit: revenue.total - cost_total,
        warnings: revenue.warnings,
        config_echo: ScenarioInputs {
            farm: *farm,
            plan: *plan,
            markets: markets.clone(),
            costs: *costs,
            rates: *rates,
        },
    })
}
