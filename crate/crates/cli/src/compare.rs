use std::path::PathBuf;

use clap::Args;
use lfpc_core::series::{moving_average, pearson_r};
use serde::Serialize;

use crate::args::{parse_range, ManifestArg};
use crate::config_err;
use crate::data::Dataset;
use crate::output;
use crate::unitroot::{transformed, Transform};

/// Pairwise Pearson correlations between series at one or more lags,
/// written to `correlations.json`.
#[derive(Args, Debug)]
pub struct Opts {
    #[command(flatten)]
    pub manifest: ManifestArg,
    /// Series to compare (at least two).
    #[arg(long = "series", num_args = 1.., required = true)]
    pub series: Vec<String>,
    #[arg(long, value_enum, default_value = "rate")]
    pub transform: Transform,
    /// Lag of the column series relative to the row series.
    #[arg(long, conflicts_with = "lag_range", allow_hyphen_values = true)]
    pub lag: Option<i32>,
    /// Lags to compute, e.g. `-2..2`; defaults to lag 0.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub lag_range: Option<(i32, i32)>,
    /// Centered moving average (odd window) applied before correlating.
    #[arg(long)]
    pub smooth: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct LagMatrix {
    lag: i32,
    /// `r[i][j]` correlates series i at t with series j at t - lag; null
    /// where the overlap is too short or a series is constant.
    r: Vec<Vec<Option<f64>>>,
}

#[derive(Serialize)]
struct Report<'a> {
    series: &'a [String],
    transform: Transform,
    smooth: Option<usize>,
    lags: Vec<LagMatrix>,
}

pub fn run(o: &Opts) -> anyhow::Result<()> {
    if o.series.len() < 2 {
        return Err(config_err("compare-sources needs at least two --series"));
    }
    let data = Dataset::open(&o.manifest.manifest)?;
    let mut series = Vec::with_capacity(o.series.len());
    for id in &o.series {
        let s = transformed(&data, id, o.transform)?;
        series.push(match o.smooth {
            Some(w) => {
                moving_average(&s, w).map_err(|e| config_err(format!("--smooth {w}: {e}")))?
            }
            None => s,
        });
    }
    let (lo, hi) = match (o.lag, o.lag_range) {
        (Some(l), _) => (l, l),
        (None, Some(r)) => r,
        (None, None) => (0, 0),
    };
    let lags = (lo..=hi)
        .map(|lag| LagMatrix {
            lag,
            r: series
                .iter()
                .map(|a| series.iter().map(|b| pearson_r(a, b, lag).ok()).collect())
                .collect(),
        })
        .collect();
    let report = Report {
        series: &o.series,
        transform: o.transform,
        smooth: o.smooth,
        lags,
    };
    output::write_all(&o.out, &[("correlations.json", output::to_json(&report)?)])
}
