//! Argument parsing and dispatch for the `beanledger` binary.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when the
//! requested quantity is infeasible. Failures print one line to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use beanledger_core::report::{fixed, ReportError};
use beanledger_core::scenario::{
    breakeven, optimize_allocation, reconcile_published_figures, run_case, sweep, Breakeven,
    OptimizationConstraint, ScenarioError, SweepSpec, SweepTarget,
};
use beanledger_core::{
    default_config, load_config, render_report, ConfigError, CostBasis, ModelConfig, ReportFormat, ReportRow,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::inputs::{parse_axis, parse_plan};

pub const DEFAULT_PORT: u16 = 8715;

#[derive(Debug, Parser)]
#[command(name = "beanledger", version, about = "Coffee value-chain profit model")]
struct Cli {
    /// Config file (JSON); missing fields take the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Trees that per-tree costs are charged on.
    #[arg(long, global = true, value_enum)]
    basis: Option<Basis>,
    /// Increment of allocation grids.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Basis {
    All,
    Bearing,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one allocation plan.
    Evaluate {
        /// all-fc | all-dc | all-gcb | none | inline JSON | path to JSON.
        #[arg(long)]
        plan: String,
        /// Market for the all-* plans.
        #[arg(long)]
        market: Option<u8>,
    },
    /// Run one case of the built-in catalog.
    Case {
        #[arg(long)]
        id: u32,
    },
    /// Vary one input over a grid.
    Sweep {
        /// Target path such as price.gcb.1, cost.dehulling, beta.2 or split.fc.2.5.
        #[arg(long)]
        axis: String,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value = "none")]
        plan: String,
        #[arg(long)]
        market: Option<u8>,
    },
    /// Zero-profit price or activity cost.
    Breakeven {
        /// price.<product>[.<market>], cost.<activity> or a bare activity name.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        plan: String,
        /// Market for the all-* plans; also narrows a price axis without one.
        #[arg(long)]
        market: Option<u8>,
    },
    /// Profit-maximizing allocation.
    Optimize {
        /// Minimum harvest share as PRODUCT:MARKET:FRACTION, e.g. DC:3:0.7.
        #[arg(long)]
        min_share: Option<String>,
    },
    /// Published headline figures next to recomputed values.
    Reconcile,
    /// Serve the HTTP API on 127.0.0.1.
    Serve {
        #[arg(long, env = "BEANLEDGER_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(ScenarioError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::InfeasibleBreakeven(m) | ScenarioError::InfeasibleConstraint(m) => {
                CliError::Infeasible(m)
            }
            other => CliError::Scenario(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            _ => 1,
        }
    }

    fn diagnostic(&self) -> String {
        match self {
            CliError::Infeasible(_) => self.to_string(),
            _ => format!("error: {self}"),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let text = e.to_string();
                let _ = writeln!(stderr, "{}", text.lines().next().unwrap_or("error: invalid arguments"));
                1
            } else {
                let _ = write!(stdout, "{e}");
                0
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.diagnostic());
            e.exit_code()
        }
    }
}

fn active_config(cli: &Cli) -> Result<ModelConfig, CliError> {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => default_config(),
    };
    let mut engine = serde_json::Map::new();
    if let Some(basis) = cli.basis {
        let basis = match basis {
            Basis::All => CostBasis::AllTrees,
            Basis::Bearing => CostBasis::BearingTrees,
        };
        engine.insert("cost_basis_override".into(), json!(basis));
    }
    if let Some(step) = cli.grid_step {
        engine.insert("grid_step".into(), json!(step));
    }
    if engine.is_empty() {
        return Ok(config);
    }
    Ok(config.overlay(&json!({ "engine": engine }))?)
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = active_config(&cli)?;
    let format = match cli.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    let bytes = match &cli.command {
        Command::Evaluate { plan, market } => {
            let plan = parse_plan(plan, *market).map_err(CliError::Usage)?;
            let result = config.evaluate(&plan).map_err(ScenarioError::from)?;
            render_report(&[ReportRow::from_result("evaluate", None, None, &result)], format)?
        }
        Command::Case { id } => {
            let rows: Vec<_> = run_case(*id, &config)?
                .iter()
                .map(|o| ReportRow::from_result(o.label.clone(), Some(o.case_id), o.x, &o.result))
                .collect();
            render_report(&rows, format)?
        }
        Command::Sweep {
            axis,
            lo,
            hi,
            step,
            plan,
            market,
        } => {
            let spec = SweepSpec {
                target: parse_axis(axis)?,
                lo: *lo,
                hi: *hi,
                step: *step,
            };
            let plan = parse_plan(plan, *market).map_err(CliError::Usage)?;
            let series = sweep(&spec, &config, &plan)?;
            let label = series.target.to_string();
            let rows: Vec<_> = series
                .points
                .iter()
                .map(|p| ReportRow {
                    scenario: label.clone(),
                    case_id: None,
                    x: Some(p.x),
                    fc_kg: p.fc_kg,
                    dc_kg: p.dc_kg,
                    gcb_kg: p.gcb_kg,
                    revenue_php: p.revenue_total,
                    cost_php: p.cost_total,
                    profit_php: p.profit,
                })
                .collect();
            render_report(&rows, format)?
        }
        Command::Breakeven { axis, plan, market } => {
            let mut target = parse_axis(axis)?;
            if let SweepTarget::Price { market: m @ None, .. } = &mut target {
                *m = *market;
            }
            let plan = parse_plan(plan, *market).map_err(CliError::Usage)?;
            match breakeven(target, &config, &plan)? {
                Breakeven::Infeasible { reason, .. } => {
                    return Err(CliError::Infeasible(reason.to_string()))
                }
                found @ Breakeven::Value { .. } => breakeven_output(&found, format)?,
            }
        }
        Command::Optimize { min_share } => {
            let constraint = match min_share {
                Some(text) => parse_min_share(text)?,
                None => OptimizationConstraint::None,
            };
            let optimum = optimize_allocation(&constraint, &config)?;
            match format {
                ReportFormat::Json => to_json(&optimum)?,
                ReportFormat::Csv => {
                    let row = ReportRow::from_result("optimum", None, None, &optimum.result);
                    render_report(&[row], format)?
                }
            }
        }
        Command::Reconcile => {
            let report = reconcile_published_figures(&config)?;
            match format {
                ReportFormat::Json => to_json(&report)?,
                ReportFormat::Csv => report.to_csv().map_err(ReportError::from)?,
            }
        }
        Command::Serve { port } => return serve_blocking(*port, config, stderr),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(ReportError::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn breakeven_output(found: &Breakeven, format: ReportFormat) -> Result<Vec<u8>, CliError> {
    let Breakeven::Value {
        axis,
        value,
        bisection,
        profit_at_value,
    } = found
    else {
        unreachable!("only values are rendered");
    };
    match format {
        ReportFormat::Json => to_json(found),
        ReportFormat::Csv => Ok(format!(
            "axis,value,bisection,profit_at_value\n{axis},{},{},{}\n",
            fixed(*value, 6),
            fixed(*bisection, 6),
            fixed(*profit_at_value, 6)
        )
        .into_bytes()),
    }
}

fn parse_min_share(text: &str) -> Result<OptimizationConstraint, CliError> {
    let bad = || CliError::Usage(format!("--min-share expects PRODUCT:MARKET:FRACTION (got '{text}')"));
    let [product, market, fraction] = text.split(':').collect::<Vec<_>>()[..] else {
        return Err(bad());
    };
    Ok(OptimizationConstraint::MinShare {
        product: product.parse().map_err(|_| bad())?,
        market_id: market.parse().map_err(|_| bad())?,
        min_fraction: fraction.parse().map_err(|_| bad())?,
    })
}

fn serve_blocking(port: u16, config: ModelConfig, stderr: &mut dyn Write) -> Result<(), CliError> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        writeln!(stderr, "listening on http://{}", listener.local_addr()?)?;
        crate::service::serve(listener, config).await
    })?;
    Ok(())
}
