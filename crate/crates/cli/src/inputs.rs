use std::path::Path;

use beanledger_core::scenario::{ScenarioError, SweepTarget};
use beanledger_core::{Activity, AllocationPlan, Product};

/// Resolves a breakeven or sweep axis. Accepts any target path plus a bare
/// activity name as shorthand for `cost.<activity>`.
pub fn parse_axis(text: &str) -> Result<SweepTarget, ScenarioError> {
    text.parse()
        .or_else(|e| text.parse::<Activity>().map(SweepTarget::Cost).map_err(|_| e))
}

/// Resolves `--plan`: `all-fc`, `all-dc` or `all-gcb` (with a market),
/// `none`, an inline JSON object, or a path to a JSON file.
pub fn parse_plan(text: &str, market: Option<u8>) -> Result<AllocationPlan, String> {
    let vertex = |product: Product| {
        let m = market.ok_or_else(|| format!("plan '{text}' needs --market"))?;
        if !(1..=5).contains(&m) {
            return Err(format!("market id ∉ {{1..5}} (got {m})"));
        }
        Ok(AllocationPlan::vertex(product, m))
    };
    match text {
        "all-fc" => vertex(Product::Fc),
        "all-dc" => vertex(Product::Dc),
        "all-gcb" => vertex(Product::Gcb),
        "none" => Ok(AllocationPlan::zero()),
        t if t.trim_start().starts_with('{') => {
            serde_json::from_str(t).map_err(|e| format!("invalid plan JSON: {e}"))
        }
        path => {
            let body = std::fs::read_to_string(Path::new(path))
                .map_err(|e| format!("cannot read plan {path}: {e}"))?;
            serde_json::from_str(&body).map_err(|e| format!("invalid plan in {path}: {e}"))
        }
    }
}
