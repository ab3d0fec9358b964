//! Prediction from fitted models: in-sample and out-of-sample evaluation and
//! long-range projection from labour-force projections.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econtests::{accuracy, TestError};
use crate::segfit::{self, FitResult, PredictorKind, SearchSpec, SegfitError};
use crate::series::{log_change, AnnualSeries, SeriesError, Unit, YearRange};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("series `{series}` does not cover {needed}")]
    MissingPredictorYears { series: String, needed: YearRange },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("invalid evaluation setup: {0}")]
    InvalidEvaluation(String),
    #[error(transparent)]
    Fit(#[from] SegfitError),
    #[error(transparent)]
    Test(#[from] TestError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type Result<T> = std::result::Result<T, ForecastError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub predicted: AnnualSeries,
    /// Years by which the prediction leads its predictors.
    pub horizon: i32,
    pub model_ref: String,
    pub deflation_intervals: Vec<YearRange>,
    /// Predicted years falling in the model's excluded interval.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub in_gap: Vec<i32>,
}

/// Which segment's coefficients are applied to a year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentRule {
    /// The segment containing the year; gap years use the earlier one and
    /// years after the fit window the last one.
    ByYear,
    /// Always the given segment, e.g. to extend a pre-break model.
    Fixed(usize),
}

/// Short identity string of a fitted model.
pub fn model_ref(model: &FitResult) -> String {
    let preds: Vec<String> = model
        .spec
        .predictors
        .iter()
        .map(|p| format!("{}@{}", p.series_id, p.lag))
        .collect();
    let brk = model
        .spec
        .break_year
        .map_or_else(|| "none".to_string(), |b| b.to_string());
    format!(
        "{}~{};break={};window={}",
        model.spec.target_id,
        preds.join("+"),
        brk,
        model.spec.fit_window
    )
}

/// Maximal runs of strictly negative values.
pub fn deflation_intervals(series: &AnnualSeries) -> Vec<YearRange> {
    let mut out: Vec<YearRange> = Vec::new();
    let mut open: Option<i32> = None;
    for (year, v) in series.iter() {
        match (v < 0.0, open) {
            (true, None) => open = Some(year),
            (false, Some(start)) => {
                out.push(YearRange::new(start, year - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        out.push(YearRange::new(start, series.last_year()));
    }
    out
}

fn horizon_of(model: &FitResult) -> i32 {
    model
        .spec
        .predictors
        .iter()
        .map(|p| p.lag)
        .min()
        .unwrap_or(0)
}

/// Evaluates the model on every year from the start of its fit window to the
/// last year its lagged predictors reach.
pub fn predict(model: &FitResult, predictors: &[&AnnualSeries]) -> Result<ForecastResult> {
    predict_with(model, predictors, SegmentRule::ByYear)
}

pub fn predict_with(
    model: &FitResult,
    predictors: &[&AnnualSeries],
    rule: SegmentRule,
) -> Result<ForecastResult> {
    let terms = &model.spec.predictors;
    if predictors.len() != terms.len() {
        return Err(ForecastError::UnsupportedModel(format!(
            "{} predictor series for {} terms",
            predictors.len(),
            terms.len()
        )));
    }
    if let SegmentRule::Fixed(i) = rule {
        if i >= model.segments.len() {
            return Err(ForecastError::UnsupportedModel(format!("no segment {i}")));
        }
    }
    let start = model.spec.fit_window.start;
    let end = terms
        .iter()
        .zip(predictors)
        .map(|(t, p)| p.last_year() + t.lag)
        .min()
        .expect("at least one predictor");
    for (t, p) in terms.iter().zip(predictors) {
        let needed = YearRange::new(start - t.lag, end - t.lag);
        if p.window(needed).is_none() {
            return Err(ForecastError::MissingPredictorYears {
                series: p.name().to_string(),
                needed,
            });
        }
    }
    let gap = model.spec.gap();
    let mut in_gap = Vec::new();
    let values: Vec<f64> = (start..=end)
        .map(|year| {
            if gap.is_some_and(|g| g.contains(year)) {
                in_gap.push(year);
            }
            let seg = match rule {
                SegmentRule::ByYear => model.spec.segment_for(year),
                SegmentRule::Fixed(i) => i,
            };
            model.segments[seg].rate(
                terms
                    .iter()
                    .zip(predictors)
                    .map(|(t, p)| (t.kind, p.get(year - t.lag).expect("checked"))),
            )
        })
        .collect();
    let predicted = AnnualSeries::new(
        format!("{}.forecast", model.spec.target_id),
        Unit::FractionPerYear,
        start,
        values,
    )?;
    Ok(ForecastResult {
        deflation_intervals: deflation_intervals(&predicted),
        predicted,
        horizon: horizon_of(model),
        model_ref: model_ref(model),
        in_gap,
    })
}

/// Labour-force input for [`project`].
#[derive(Debug, Clone, Copy)]
pub enum LabourForceInput<'a> {
    /// Already a change rate.
    Rate(&'a AnnualSeries),
    /// Projected levels. When `history` holds the level of the year before
    /// the projection starts, that year bridges the first projected change.
    Level {
        projection: &'a AnnualSeries,
        history: Option<&'a AnnualSeries>,
    },
}

fn projected_rates(input: LabourForceInput<'_>) -> Result<AnnualSeries> {
    match input {
        LabourForceInput::Rate(r) => Ok(r.clone()),
        LabourForceInput::Level {
            projection,
            history,
        } => {
            let bridge_year = projection.first_year() - 1;
            let bridged = match history.and_then(|h| h.get(bridge_year)) {
                Some(level) => {
                    let mut v = vec![level];
                    v.extend_from_slice(projection.values());
                    AnnualSeries::new(projection.name(), Unit::Level, bridge_year, v)?
                }
                None => projection.clone(),
            };
            Ok(log_change(&bridged)?)
        }
    }
}

/// Applies the last segment's coefficients to projected labour-force
/// change, producing inflation from the first year the lagged projection
/// reaches through `through_year`.
pub fn project(
    model: &FitResult,
    lf_projection: LabourForceInput<'_>,
    through_year: i32,
) -> Result<ForecastResult> {
    let [term] = model.spec.predictors.as_slice() else {
        return Err(ForecastError::UnsupportedModel(
            "projection needs a single labour-force predictor".into(),
        ));
    };
    if term.kind != PredictorKind::LabourForceChange {
        return Err(ForecastError::UnsupportedModel(
            "projection needs a labour-force predictor".into(),
        ));
    }
    let l = projected_rates(lf_projection)?;
    let first = l.first_year() + term.lag;
    let needed = YearRange::new(first - term.lag, through_year - term.lag);
    if through_year < first || l.window(needed).is_none() {
        return Err(ForecastError::MissingPredictorYears {
            series: l.name().to_string(),
            needed,
        });
    }
    let seg = model.segments.last().expect("fitted model has segments");
    let values = (first..=through_year)
        .map(|year| seg.rate([(term.kind, l.get(year - term.lag).expect("checked"))]))
        .collect();
    let predicted = AnnualSeries::new(
        format!("{}.projection", model.spec.target_id),
        Unit::FractionPerYear,
        first,
        values,
    )?;
    Ok(ForecastResult {
        deflation_intervals: deflation_intervals(&predicted),
        predicted,
        horizon: term.lag,
        model_ref: model_ref(model),
        in_gap: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastComparison {
    pub horizon: usize,
    pub model_rmsfe: f64,
    pub naive_rmsfe: f64,
    pub n_years: usize,
    pub window: YearRange,
}

/// Horizon for the no-change benchmark: the model's lead, at least one year.
pub fn benchmark_horizon(model: &FitResult) -> usize {
    horizon_of(model).max(1) as usize
}

/// Refits on `[fit_window.start, train_end]` and forecasts each year of
/// `eval_window` from predictors observed `lag` years earlier.
pub fn oos_evaluate(
    search: &SearchSpec,
    target: &AnnualSeries,
    predictors: &[&AnnualSeries],
    train_end: i32,
    eval_window: YearRange,
) -> Result<(ForecastComparison, FitResult)> {
    if train_end <= search.fit_window.start || train_end > search.fit_window.end {
        return Err(ForecastError::InvalidEvaluation(format!(
            "train end {train_end} outside {}",
            search.fit_window
        )));
    }
    if target.window(eval_window).is_none() {
        return Err(ForecastError::MissingPredictorYears {
            series: target.name().to_string(),
            needed: eval_window,
        });
    }
    let train = SearchSpec {
        fit_window: YearRange::new(search.fit_window.start, train_end),
        ..search.clone()
    };
    let fit = segfit::fit_model(&train, target, predictors)?;
    let lag = horizon_of(&fit);
    if train_end + lag > eval_window.start || eval_window.start <= train_end {
        return Err(ForecastError::InvalidEvaluation(format!(
            "evaluation {eval_window} must start after training end {train_end} (lag {lag})"
        )));
    }
    let forecast = predict(&fit, predictors)?;
    let mut errors = Vec::with_capacity(eval_window.len());
    for year in eval_window.years() {
        let p =
            forecast
                .predicted
                .get(year)
                .ok_or_else(|| ForecastError::MissingPredictorYears {
                    series: fit.spec.predictors[0].series_id.clone(),
                    needed: eval_window,
                })?;
        errors.push(target.get(year).expect("checked") - p);
    }
    let h = benchmark_horizon(&fit);
    let comparison = ForecastComparison {
        horizon: h,
        model_rmsfe: accuracy::rms(&errors),
        naive_rmsfe: accuracy::naive_rmsfe_window(target, h, eval_window.start, eval_window.end)?,
        n_years: errors.len(),
        window: eval_window,
    };
    Ok((comparison, fit))
}

/// Model RMSE against the no-change benchmark over the fit window, skipping
/// excluded years for both.
pub fn in_sample_comparison(model: &FitResult) -> Result<ForecastComparison> {
    in_sample_comparison_at(model, benchmark_horizon(model))
}

/// As [`in_sample_comparison`] with an explicit benchmark horizon `h >= 1`.
pub fn in_sample_comparison_at(model: &FitResult, h: usize) -> Result<ForecastComparison> {
    if h == 0 {
        return Err(ForecastError::InvalidEvaluation(
            "benchmark horizon must be at least 1".into(),
        ));
    }
    let obs = &model.observed_annual;
    let gap = model.spec.gap();
    let mut diffs = Vec::new();
    for (year, v) in obs.iter().skip(h) {
        if gap.is_some_and(|g| g.contains(year) || g.contains(year - h as i32)) {
            continue;
        }
        diffs.push(v - obs.get(year - h as i32).expect("in range"));
    }
    if diffs.is_empty() {
        return Err(TestError::TooShort {
            len: obs.len(),
            needed: h + 1,
        }
        .into());
    }
    Ok(ForecastComparison {
        horizon: h,
        model_rmsfe: model.rmse_annual,
        naive_rmsfe: accuracy::rms(&diffs),
        n_years: model.n_eval,
        window: model.spec.fit_window,
    })
}
