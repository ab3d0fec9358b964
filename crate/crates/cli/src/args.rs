use std::path::PathBuf;

use clap::Args;
use lfpc_core::segfit::{
    BreakSearch, GammaMode, IntRange, PredictorKind, PredictorSearch, SearchSpec,
    DEFAULT_BREAK_RANGE, DEFAULT_LAG_RANGE,
};
use lfpc_core::YearRange;

use crate::config_err;
use crate::data::Dataset;

/// `LO..HI` with `LO <= HI`; a single integer is accepted as `N..N`.
pub fn parse_range(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), s.trim()),
    };
    let lo: i32 = lo.parse().map_err(|_| format!("bad range bound `{lo}`"))?;
    let hi: i32 = hi.parse().map_err(|_| format!("bad range bound `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

pub fn year_range(r: (i32, i32)) -> YearRange {
    YearRange::new(r.0, r.1)
}

#[derive(Args, Debug, Clone)]
pub struct ManifestArg {
    /// Dataset manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Model selection shared by `fit` and `forecast`.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[command(flatten)]
    pub manifest: ManifestArg,
    /// Series to explain (inflation or unemployment).
    #[arg(long)]
    pub target: String,
    /// Predictor series; labour-force ids enter as log change, unemployment
    /// ids as stored. At most one of each kind.
    #[arg(long = "predictor", required = true)]
    pub predictors: Vec<String>,
    /// Fixed labour-force lag.
    #[arg(long, conflicts_with = "lag_range", allow_hyphen_values = true)]
    pub lag: Option<i32>,
    /// Labour-force lags to search, e.g. `0..3`.
    #[arg(long, value_parser = parse_range)]
    pub lag_range: Option<(i32, i32)>,
    /// Fixed unemployment lag.
    #[arg(long, conflicts_with = "unemp_lag_range", allow_hyphen_values = true)]
    pub unemp_lag: Option<i32>,
    /// Unemployment lags to search.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub unemp_lag_range: Option<(i32, i32)>,
    /// Fixed break year; the segment before includes it.
    #[arg(long = "break", conflicts_with_all = ["break_range", "no_break"])]
    pub break_year: Option<i32>,
    /// Break years to search, e.g. `1980..1990`.
    #[arg(long, value_parser = parse_range, conflicts_with = "no_break")]
    pub break_range: Option<(i32, i32)>,
    /// Fit a single segment.
    #[arg(long)]
    pub no_break: bool,
    /// Years dropped between the two segments, e.g. `1983..1985`.
    #[arg(long, value_parser = parse_range)]
    pub exclude: Option<(i32, i32)>,
    /// Fit window; defaults to the years every predictor covers at every
    /// searched lag.
    #[arg(long, value_parser = parse_range)]
    pub window: Option<(i32, i32)>,
    /// Hold the unemployment coefficient at this value in every segment.
    #[arg(long, allow_hyphen_values = true)]
    pub pin_gamma: Option<f64>,
}

impl ModelArgs {
    pub fn search_spec(&self, data: &Dataset) -> anyhow::Result<SearchSpec> {
        let target = data.rate(&self.target)?;
        let mut predictors = Vec::new();
        for id in &self.predictors {
            let kind = data.kind(id)?;
            let lags = match kind {
                PredictorKind::LabourForceChange => match (self.lag, self.lag_range) {
                    (Some(l), _) => IntRange::single(l),
                    (None, Some((lo, hi))) => IntRange::new(lo, hi),
                    (None, None) => DEFAULT_LAG_RANGE,
                },
                PredictorKind::Unemployment => match (self.unemp_lag, self.unemp_lag_range) {
                    (Some(l), _) => IntRange::single(l),
                    (None, Some((lo, hi))) => IntRange::new(lo, hi),
                    (None, None) => IntRange::single(0),
                },
            };
            predictors.push(PredictorSearch {
                series_id: id.clone(),
                kind,
                lags,
            });
        }
        let excluded = self.exclude.map(year_range);
        let breaks = match (self.break_year, self.break_range, self.no_break, excluded) {
            (Some(b), ..) => BreakSearch::Fixed(b),
            (None, Some((lo, hi)), ..) => BreakSearch::Range(IntRange::new(lo, hi)),
            (None, None, true, _) => BreakSearch::None,
            (None, None, false, Some(e)) => BreakSearch::Fixed(e.start - 1),
            (None, None, false, None) => BreakSearch::Range(DEFAULT_BREAK_RANGE),
        };
        let fit_window = match self.window {
            Some(w) => year_range(w),
            None => {
                let mut start = target.first_year();
                let mut end = target.last_year();
                for p in &predictors {
                    let s = data.rate(&p.series_id)?;
                    start = start.max(s.first_year() + p.lags.hi);
                    end = end.min(s.last_year() + p.lags.lo);
                }
                if start >= end {
                    return Err(config_err(format!(
                        "target and predictors share no usable years (derived window {start}..{end})"
                    )));
                }
                YearRange::new(start, end)
            }
        };
        Ok(SearchSpec {
            target_id: self.target.clone(),
            predictors,
            breaks,
            fit_window,
            excluded_interval: excluded,
            gamma: self.pin_gamma.map_or(GammaMode::Free, GammaMode::Fixed),
        })
    }
}
