use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use lfpc_core::econtests::{adf_test, pp_test, AdfLag, Bandwidth, Deterministic, TestReport};
use lfpc_core::series::cumulative;
use lfpc_core::AnnualSeries;
use serde::Serialize;

use crate::args::ManifestArg;
use crate::data::Dataset;
use crate::output;

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Values as stored.
    Raw,
    /// Annual rate; levels are log-differenced.
    Rate,
    /// Running sum of the annual rate.
    Cumulative,
}

/// `N` or `aic` (optionally `aic:MAX`).
pub fn parse_adf_lag(s: &str) -> Result<AdfLag, String> {
    match s.split_once(':') {
        None if s == "aic" => Ok(AdfLag::Aic { max_lag: None }),
        Some(("aic", m)) => m
            .parse()
            .map(|m| AdfLag::Aic { max_lag: Some(m) })
            .map_err(|_| format!("bad max lag `{m}`")),
        _ => s
            .parse()
            .map(AdfLag::Fixed)
            .map_err(|_| format!("bad ADF lag `{s}`")),
    }
}

/// `N` or `auto`.
pub fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    if s == "auto" {
        Ok(Bandwidth::Auto)
    } else {
        s.parse()
            .map(Bandwidth::Fixed)
            .map_err(|_| format!("bad bandwidth `{s}`"))
    }
}

/// ADF and Phillips-Perron tests per series, written to `tests.json`.
#[derive(Args, Debug)]
pub struct Opts {
    #[command(flatten)]
    pub manifest: ManifestArg,
    /// Series to test; defaults to every manifest entry.
    #[arg(long = "series")]
    pub series: Vec<String>,
    #[arg(long, value_enum, default_value = "rate")]
    pub transform: Transform,
    /// Lagged differences in the ADF regression: `N`, `aic` or `aic:MAX`.
    #[arg(long, value_parser = parse_adf_lag, default_value = "0")]
    pub adf_lag: AdfLag,
    /// Phillips-Perron truncation lag: `N` or `auto`.
    #[arg(long, value_parser = parse_bandwidth, default_value = "auto")]
    pub bandwidth: Bandwidth,
    /// Include a linear trend.
    #[arg(long)]
    pub trend: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SeriesTests {
    series_id: String,
    transform: Transform,
    first_year: i32,
    last_year: i32,
    adf: TestReport,
    pp: TestReport,
}

pub fn transformed(data: &Dataset, id: &str, t: Transform) -> anyhow::Result<AnnualSeries> {
    Ok(match t {
        Transform::Raw => data.raw(id)?,
        Transform::Rate => data.rate(id)?,
        Transform::Cumulative => {
            let r = data.rate(id)?;
            cumulative(&r, r.first_year())?.into_series()
        }
    })
}

pub fn run(o: &Opts) -> anyhow::Result<()> {
    let data = Dataset::open(&o.manifest.manifest)?;
    let ids: Vec<String> = if o.series.is_empty() {
        data.manifest
            .entries
            .iter()
            .map(|e| e.series_id.clone())
            .collect()
    } else {
        o.series.clone()
    };
    let det = if o.trend {
        Deterministic::ConstantTrend
    } else {
        Deterministic::Constant
    };
    let mut results = Vec::new();
    for id in &ids {
        let x = transformed(&data, id, o.transform)?;
        let adf = adf_test(&x, o.adf_lag, det).with_context(|| format!("ADF on `{id}`"))?;
        let pp =
            pp_test(&x, o.bandwidth, det).with_context(|| format!("Phillips-Perron on `{id}`"))?;
        eprintln!(
            "{id}: adf tau {:.3} (5% {:.2}), pp z_t {:.3}, z_rho {:.3}",
            adf.value("tau").unwrap_or(f64::NAN),
            adf.statistic("tau")
                .map_or(f64::NAN, |s| s.critical_values.p05),
            pp.value("z_t").unwrap_or(f64::NAN),
            pp.value("z_rho").unwrap_or(f64::NAN),
        );
        results.push(SeriesTests {
            series_id: id.clone(),
            transform: o.transform,
            first_year: x.first_year(),
            last_year: x.last_year(),
            adf,
            pp,
        });
    }
    output::write_all(&o.out, &[("tests.json", output::to_json(&results)?)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_and_bandwidth_syntax() {
        assert_eq!(parse_adf_lag("2"), Ok(AdfLag::Fixed(2)));
        assert_eq!(parse_adf_lag("aic"), Ok(AdfLag::Aic { max_lag: None }));
        assert_eq!(parse_adf_lag("aic:4"), Ok(AdfLag::Aic { max_lag: Some(4) }));
        assert!(parse_adf_lag("x").is_err());
        assert_eq!(parse_bandwidth("auto"), Ok(Bandwidth::Auto));
        assert_eq!(parse_bandwidth("3"), Ok(Bandwidth::Fixed(3)));
    }
}
