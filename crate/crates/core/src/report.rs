//! Tabular scenario reports (CSV and JSON).

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Product, ScenarioResult};

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "case_id",
    "x",
    "fc_kg",
    "dc_kg",
    "gcb_kg",
    "revenue_php",
    "cost_php",
    "profit_php",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report has no rows")]
    Empty,
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode report: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot encode report: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

/// One line of a report. Values are kept at full precision; rounding
/// happens only when rendering CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub case_id: Option<u32>,
    pub x: Option<f64>,
    pub fc_kg: f64,
    pub dc_kg: f64,
    pub gcb_kg: f64,
    pub revenue_php: f64,
    pub cost_php: f64,
    pub profit_php: f64,
}

impl ReportRow {
    pub fn from_result(
        scenario: impl Into<String>,
        case_id: Option<u32>,
        x: Option<f64>,
        result: &ScenarioResult,
    ) -> Self {
        ReportRow {
            scenario: scenario.into(),
            case_id,
            x,
            fc_kg: result.sellable.total(Product::Fc),
            dc_kg: result.sellable.total(Product::Dc),
            gcb_kg: result.sellable.total(Product::Gcb),
            revenue_php: result.revenue_total,
            cost_php: result.cost_total,
            profit_php: result.profit,
        }
    }
}

/// Fixed-point rendering without a negative zero. Ties on the exact binary
/// value round half to even.
pub fn fixed(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn currency(value: f64) -> String {
    fixed(value, 2)
}

pub fn mass(value: f64) -> String {
    fixed(value, 4)
}

pub fn render_report(rows: &[ReportRow], format: ReportFormat) -> Result<Vec<u8>, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            writer.write_record(CSV_HEADER)?;
            for row in rows {
                writer.write_record([
                    row.scenario.clone(),
                    row.case_id.map(|c| c.to_string()).unwrap_or_default(),
                    row.x.map(mass).unwrap_or_default(),
                    mass(row.fc_kg),
                    mass(row.dc_kg),
                    mass(row.gcb_kg),
                    currency(row.revenue_php),
                    currency(row.cost_php),
                    currency(row.profit_php),
                ])?;
            }
            writer
                .into_inner()
                .map_err(|e| ReportError::Io(e.into_error()))
        }
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes the rendered report and returns the number of bytes written.
pub fn write_report<W: Write>(
    rows: &[ReportRow],
    dest: &mut W,
    format: ReportFormat,
) -> Result<usize, ReportError> {
    let bytes = render_report(rows, format)?;
    dest.write_all(&bytes)?;
    dest.flush()?;
    Ok(bytes.len())
}
