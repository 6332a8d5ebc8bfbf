//! Differentially private smart-meter aggregation and short-term load
//! forecasting.
//!
//! The pipeline: households (or zone aggregators) add calibrated noise to
//! hourly load readings, zones and the region aggregate them, regression
//! models forecast the regional load either directly or as a sum of
//! per-zone forecasts, and a privacy accountant translates the accumulated
//! guarantee over thousands of releases into an interpretable
//! re-identification confidence. A sweep harness maps out the trade-off
//! between noise scale and forecast utility.
//!
//! Start with the runnable programs in `examples/`; each one exercises one
//! capability end to end. The `dplf` binary wires the same library calls
//! into a small command-line tool.

pub mod config;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod ingest;
pub mod metering;
pub mod privacy;
pub mod rng;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
