use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use lfpc_core::econtests::{
    johansen_rank, johansen_trace, residual_cointegration, AdfLag, Bandwidth, Significance,
    TestReport,
};
use lfpc_core::{AnnualSeries, CumulativeSeries, Unit};
use serde::{Deserialize, Serialize};

use crate::config_err;
use crate::output;
use crate::unitroot::{parse_adf_lag, parse_bandwidth};

/// Residual ADF/PP and Johansen trace tests on the observed and predicted
/// cumulative curves of a previous `fit`, written to `cointegration.json`.
#[derive(Args, Debug)]
pub struct Opts {
    /// `curves.csv` written by `fit`.
    #[arg(long)]
    pub curves: PathBuf,
    #[arg(long, value_parser = parse_adf_lag, default_value = "0")]
    pub adf_lag: AdfLag,
    #[arg(long, value_parser = parse_bandwidth, default_value = "auto")]
    pub bandwidth: Bandwidth,
    /// Lagged differences in the VECM.
    #[arg(long, default_value_t = 1)]
    pub var_lag: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct CurveRow {
    year: i32,
    observed_cumulative: f64,
    predicted_cumulative: f64,
}

#[derive(Serialize)]
struct Report {
    first_year: i32,
    last_year: i32,
    residual: TestReport,
    johansen: TestReport,
    /// Rank by the sequential trace procedure at 5%.
    johansen_rank: usize,
}

fn read_curves(path: &PathBuf) -> anyhow::Result<(CumulativeSeries, CumulativeSeries)> {
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<CurveRow> = Vec::new();
    for r in rdr.deserialize() {
        rows.push(r.map_err(|e| config_err(format!("{}: {e}", path.display())))?);
    }
    let first = rows
        .first()
        .ok_or_else(|| config_err(format!("{}: no rows", path.display())))?
        .year;
    if rows
        .iter()
        .enumerate()
        .any(|(i, r)| r.year != first + i as i32)
    {
        return Err(config_err(format!(
            "{}: years are not consecutive",
            path.display()
        )));
    }
    let build = |name: &str, f: fn(&CurveRow) -> f64| -> anyhow::Result<CumulativeSeries> {
        let s = AnnualSeries::new(name, Unit::Level, first, rows.iter().map(f).collect())?;
        Ok(CumulativeSeries::from_levels(s))
    };
    Ok((
        build("observed_cumulative", |r| r.observed_cumulative)?,
        build("predicted_cumulative", |r| r.predicted_cumulative)?,
    ))
}

pub fn run(o: &Opts) -> anyhow::Result<()> {
    let (obs, pred) = read_curves(&o.curves)?;
    let residual =
        residual_cointegration(&obs, &pred, o.adf_lag, o.bandwidth).context("residual tests")?;
    let johansen = johansen_trace(&obs, &pred, o.var_lag).context("Johansen trace test")?;
    let report = Report {
        first_year: obs.range().start,
        last_year: obs.range().end,
        johansen_rank: johansen_rank(&johansen, Significance::P05),
        residual,
        johansen,
    };
    eprintln!(
        "adf tau {:.3}, pp z_t {:.3}, trace r0 {:.2} r1 {:.2}, rank {}",
        report.residual.value("adf_tau").unwrap_or(f64::NAN),
        report.residual.value("pp_z_t").unwrap_or(f64::NAN),
        report.johansen.value("trace_r0").unwrap_or(f64::NAN),
        report.johansen.value("trace_r1").unwrap_or(f64::NAN),
        report.johansen_rank
    );
    output::write_all(&o.out, &[("cointegration.json", output::to_json(&report)?)])
}
