//! Scenario configuration, experiment drivers and report writers behind the
//! `qnormal` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, Format, Mode, Overrides, ScenarioConfig};
pub use error::CliError;
pub use report::Report;
pub use run::run;
