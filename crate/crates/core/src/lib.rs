//! Lagged, segmented linear links between inflation, unemployment and
//! labour-force change, estimated by least squares on cumulative curves with
//! both curve endpoints pinned to observations.
//!
//! - [`series`]: annual series and their transformations
//! - [`ingest`]: manifest and CSV loading, synthetic data
//! - [`segfit`]: the constrained cumulative fit and lag/break search
//! - [`econtests`]: ADF, Phillips-Perron, Johansen, RMSE/R², naive benchmarks
//! - [`forecast`]: prediction, projection and deflation intervals

pub mod econtests;
pub mod forecast;
pub mod ingest;
pub mod ols;
pub mod segfit;
pub mod series;

pub use series::{AnnualSeries, CumulativeSeries, Unit, YearRange};
