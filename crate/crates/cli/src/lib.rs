//! Command-line and HTTP front ends for the beanledger model.
//!
//! Both front ends share the engine in `beanledger-core` and report the
//! same numbers for the same inputs.

pub mod cli;
mod inputs;
pub mod service;

pub use cli::{run, CliError};
pub use inputs::{parse_axis, parse_plan};
pub use service::{router, serve};
