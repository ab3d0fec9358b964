//! Segmented, lagged linear links between annual rates, estimated on their
//! cumulative curves.
//!
//! Within a segment `[start, end]` with `n` years the observed cumulative is
//! `Y(k) = anchor + sum(obs[start..=start+k-1])` and the model is
//!
//! ```text
//! Yhat(k) = anchor + sum_j c_j X_j(k) + alpha * k
//! ```
//!
//! where `X_j` is the cumulative of predictor `j` shifted by its lag. The fit
//! minimizes `sum_k (Y(k) - Yhat(k))^2` subject to `Yhat(n) = Y(n)`, so the
//! predicted curve meets the observed one at the anchor (`k = 0`) and at the
//! segment end. Eliminating `alpha` through the constraint leaves an
//! unconstrained least-squares problem in the slopes alone:
//!
//! ```text
//! Z(k)   = (Y(k) - anchor) - k/n * (Y(n) - anchor)
//! W_j(k) = X_j(k) - k/n * X_j(n)
//! min    sum_k (Z(k) - sum_j c_j W_j(k))^2
//! ```
//!
//! [`fit_model`] runs this per segment over a grid of lags and break years
//! and keeps the candidate with the smallest total cumulative SSE.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econtests::accuracy;
use crate::ols::ols;
use crate::series::{AnnualSeries, SeriesError, Unit, YearRange};

/// Largest admissible absolute lag for any predictor.
pub const MAX_LAG: i32 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegfitError {
    #[error("segment {window} has {len} years, needs at least {needed}")]
    WindowTooShort {
        window: YearRange,
        len: usize,
        needed: usize,
    },
    #[error("predictor `{0}` has a cumulative exactly proportional to elapsed time on {1}")]
    DegeneratePredictor(String, YearRange),
    #[error("predictors are collinear on {0}")]
    CollinearPredictors(YearRange),
    #[error("series `{series}` does not cover {needed}")]
    InsufficientData { series: String, needed: YearRange },
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("search grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type Result<T> = std::result::Result<T, SegfitError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    /// Annual log change of the labour force; its lag must be non-negative.
    LabourForceChange,
    /// Unemployment rate; its lag may be negative.
    Unemployment,
}

impl PredictorKind {
    pub fn lag_bounds(self) -> (i32, i32) {
        match self {
            PredictorKind::LabourForceChange => (0, MAX_LAG),
            PredictorKind::Unemployment => (-MAX_LAG, MAX_LAG),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorTerm {
    pub series_id: String,
    pub kind: PredictorKind,
    pub lag: i32,
}

/// How the unemployment slope is treated when an unemployment predictor is
/// present.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum GammaMode {
    #[default]
    Free,
    Fixed(f64),
}

/// A fully resolved model: every lag and the break year are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub target_id: String,
    pub predictors: Vec<PredictorTerm>,
    pub break_year: Option<i32>,
    pub fit_window: YearRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded_interval: Option<YearRange>,
    #[serde(default)]
    pub gamma: GammaMode,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SegfitError::InvalidSpec(m));
        if self.predictors.is_empty() || self.predictors.len() > 2 {
            return bad(format!(
                "{} predictors given, need 1 or 2",
                self.predictors.len()
            ));
        }
        if self.predictors.len() == 2 && self.predictors[0].kind == self.predictors[1].kind {
            return bad("two predictors of the same kind".into());
        }
        for p in &self.predictors {
            let (lo, hi) = p.kind.lag_bounds();
            if p.lag < lo || p.lag > hi {
                return bad(format!(
                    "lag {} of `{}` outside [{lo}, {hi}]",
                    p.lag, p.series_id
                ));
            }
        }
        if self.fit_window.is_empty() {
            return bad(format!("empty fit window {}", self.fit_window));
        }
        if let GammaMode::Fixed(g) = self.gamma {
            if !g.is_finite() {
                return bad("pinned gamma is not finite".into());
            }
        }
        match (self.break_year, self.excluded_interval) {
            (None, Some(_)) => return bad("an excluded interval needs a break year".into()),
            (Some(b), ex) => {
                if b <= self.fit_window.start || b >= self.fit_window.end {
                    return bad(format!("break {b} not strictly inside {}", self.fit_window));
                }
                if let Some(ex) = ex {
                    if ex.is_empty() {
                        return bad(format!("empty excluded interval {ex}"));
                    }
                    if ex.start > b + 1 || ex.end < b {
                        return bad(format!("excluded interval {ex} does not touch break {b}"));
                    }
                    if ex.start <= self.fit_window.start || ex.end >= self.fit_window.end {
                        return bad(format!("excluded interval {ex} reaches the window edge"));
                    }
                }
            }
            (None, None) => {}
        }
        Ok(())
    }

    /// Segment windows in time order. Years of the excluded interval belong
    /// to none of them.
    pub fn segment_windows(&self) -> Vec<YearRange> {
        let w = self.fit_window;
        match self.break_year {
            None => vec![w],
            Some(b) => {
                let (e0, e1) = self
                    .excluded_interval
                    .map_or((b + 1, b), |ex| (ex.start, ex.end));
                vec![
                    YearRange::new(w.start, b.min(e0 - 1)),
                    YearRange::new((b + 1).max(e1 + 1), w.end),
                ]
            }
        }
    }

    /// Years between the segments that take part in no error statistic.
    pub fn gap(&self) -> Option<YearRange> {
        let segs = self.segment_windows();
        if segs.len() < 2 {
            return None;
        }
        let gap = YearRange::new(segs[0].end + 1, segs[1].start - 1);
        (!gap.is_empty()).then_some(gap)
    }

    /// Index of the segment used to evaluate `year`. Gap years use the
    /// earlier segment, years past the window the last one.
    pub fn segment_for(&self, year: i32) -> usize {
        let segs = self.segment_windows();
        segs.iter().rposition(|s| year >= s.start).unwrap_or(0)
    }

    pub fn max_lag(&self) -> i32 {
        self.predictors.iter().map(|p| p.lag).max().unwrap_or(0)
    }
}

/// Coefficients of one segment. `beta` belongs to the labour-force term,
/// `gamma` to the unemployment term; whichever predictor is absent is `None`.
///
/// The standard errors are classical annual-OLS errors evaluated at these
/// point estimates, not errors of the cumulative fit itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentCoefficients {
    pub window: YearRange,
    pub alpha: f64,
    pub alpha_se: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_se: Option<f64>,
    #[serde(default)]
    pub gamma_fixed: bool,
    /// Anchor level of the observed cumulative at `window.start - 1`.
    pub anchor: f64,
    pub sse_cumulative: f64,
}

impl SegmentCoefficients {
    pub fn slope(&self, kind: PredictorKind) -> f64 {
        match kind {
            PredictorKind::LabourForceChange => self.beta,
            PredictorKind::Unemployment => self.gamma,
        }
        .unwrap_or(0.0)
    }

    /// `alpha + sum_j slope_j * x_j`.
    pub fn rate(&self, inputs: impl IntoIterator<Item = (PredictorKind, f64)>) -> f64 {
        inputs
            .into_iter()
            .fold(self.alpha, |acc, (kind, x)| acc + self.slope(kind) * x)
    }
}

/// One predictor as seen by [`fit_segment`].
#[derive(Debug, Clone, Copy)]
pub struct Regressor<'a> {
    pub kind: PredictorKind,
    pub rates: &'a AnnualSeries,
    pub lag: i32,
    /// Pins the slope instead of estimating it.
    pub fixed: Option<f64>,
}

impl Regressor<'_> {
    fn lagged(&self, window: YearRange) -> Result<&[f64]> {
        let needed = YearRange::new(window.start - self.lag, window.end - self.lag);
        self.rates
            .window(needed)
            .ok_or_else(|| SegfitError::InsufficientData {
                series: self.rates.name().to_string(),
                needed,
            })
    }
}

fn target_window(obs: &AnnualSeries, window: YearRange) -> Result<&[f64]> {
    obs.window(window)
        .ok_or_else(|| SegfitError::InsufficientData {
            series: obs.name().to_string(),
            needed: window,
        })
}

fn running_sum(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Removes the straight line through the origin and the last point.
fn detrend_to_endpoint(cum: &[f64]) -> Vec<f64> {
    let n = cum.len() as f64;
    let last = *cum.last().expect("non-empty");
    cum.iter()
        .enumerate()
        .map(|(i, &c)| c - (i + 1) as f64 / n * last)
        .collect()
}

/// Constrained least-squares fit of one segment on cumulative curves.
///
/// `anchor_value` is the observed cumulative level at `window.start - 1`.
/// The returned coefficients make the predicted cumulative equal the
/// observed cumulative at the anchor and at `window.end`.
pub fn fit_segment(
    obs_rate: &AnnualSeries,
    regressors: &[Regressor<'_>],
    window: YearRange,
    anchor_value: f64,
) -> Result<SegmentCoefficients> {
    let needed = 2 + regressors.len();
    if window.len() < needed {
        return Err(SegfitError::WindowTooShort {
            window,
            len: window.len(),
            needed,
        });
    }
    let n = window.len() as f64;
    let y = target_window(obs_rate, window)?;
    let y_cum = running_sum(y);
    let mut z = detrend_to_endpoint(&y_cum);

    let mut x_cums = Vec::with_capacity(regressors.len());
    let mut free = Vec::new();
    for (j, r) in regressors.iter().enumerate() {
        let xc = running_sum(r.lagged(window)?);
        let w = detrend_to_endpoint(&xc);
        match r.fixed {
            Some(c) => z.iter_mut().zip(&w).for_each(|(zk, wk)| *zk -= c * wk),
            None => {
                let sww: f64 = w.iter().map(|v| v * v).sum();
                let sxx: f64 = xc.iter().map(|v| v * v).sum();
                if sww <= 1e-12 * sxx || sww == 0.0 {
                    return Err(SegfitError::DegeneratePredictor(
                        r.rates.name().to_string(),
                        window,
                    ));
                }
                free.push((j, w));
            }
        }
        x_cums.push(xc);
    }

    let mut slopes: Vec<f64> = regressors.iter().map(|r| r.fixed.unwrap_or(0.0)).collect();
    match free.as_slice() {
        [] => {}
        [(j, w)] => {
            let sww: f64 = w.iter().map(|v| v * v).sum();
            let swz: f64 = w.iter().zip(&z).map(|(a, b)| a * b).sum();
            slopes[*j] = swz / sww;
        }
        [(j1, w1), (j2, w2)] => {
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
            let (a11, a12, a22) = (dot(w1, w1), dot(w1, w2), dot(w2, w2));
            let (b1, b2) = (dot(w1, &z), dot(w2, &z));
            let det = a11 * a22 - a12 * a12;
            if det <= 1e-10 * a11 * a22 {
                return Err(SegfitError::CollinearPredictors(window));
            }
            slopes[*j1] = (a22 * b1 - a12 * b2) / det;
            slopes[*j2] = (a11 * b2 - a12 * b1) / det;
        }
        _ => unreachable!("at most two predictors"),
    }

    let y_end = *y_cum.last().expect("non-empty");
    let alpha = (y_end
        - slopes
            .iter()
            .zip(&x_cums)
            .map(|(c, xc)| c * xc.last().expect("non-empty"))
            .sum::<f64>())
        / n;

    let sse_cumulative = (0..window.len())
        .map(|k| {
            let pred = slopes
                .iter()
                .zip(&x_cums)
                .map(|(c, xc)| c * xc[k])
                .sum::<f64>()
                + alpha * (k + 1) as f64;
            let e = y_cum[k] - pred;
            e * e
        })
        .sum();

    let mut seg = SegmentCoefficients {
        window,
        alpha,
        alpha_se: 0.0,
        beta: None,
        beta_se: None,
        gamma: None,
        gamma_se: None,
        gamma_fixed: false,
        anchor: anchor_value,
        sse_cumulative,
    };
    for (r, &c) in regressors.iter().zip(&slopes) {
        match r.kind {
            PredictorKind::LabourForceChange => seg.beta = Some(c),
            PredictorKind::Unemployment => {
                seg.gamma = Some(c);
                seg.gamma_fixed = r.fixed.is_some();
            }
        }
    }
    let (a_se, b_se, g_se) = standard_errors(&seg, obs_rate, regressors)?;
    seg.alpha_se = a_se;
    seg.beta_se = b_se;
    seg.gamma_se = g_se;
    Ok(seg)
}

/// Annual OLS standard errors of a fitted segment, evaluated at its
/// coefficients: residuals come from the segment's own `alpha` and slopes,
/// the covariance from the annual design `[1, free predictors]`. Pinned
/// slopes report an error of zero.
pub fn standard_errors(
    segment: &SegmentCoefficients,
    obs_rate: &AnnualSeries,
    regressors: &[Regressor<'_>],
) -> Result<(f64, Option<f64>, Option<f64>)> {
    let window = segment.window;
    let n_free = regressors.iter().filter(|r| r.fixed.is_none()).count();
    let needed = regressors.len() + 2;
    if window.len() < needed {
        return Err(SegfitError::WindowTooShort {
            window,
            len: window.len(),
            needed,
        });
    }
    let y = target_window(obs_rate, window)?;
    let xs: Vec<&[f64]> = regressors
        .iter()
        .map(|r| r.lagged(window))
        .collect::<Result<_>>()?;

    let ssr: f64 = (0..y.len())
        .map(|t| {
            let pred = segment.rate(regressors.iter().zip(&xs).map(|(r, x)| (r.kind, x[t])));
            let e = y[t] - pred;
            e * e
        })
        .sum();
    let sigma2 = ssr / (y.len() - n_free - 1) as f64;

    let rows: Vec<Vec<f64>> = (0..y.len())
        .map(|t| {
            std::iter::once(1.0)
                .chain(
                    regressors
                        .iter()
                        .zip(&xs)
                        .filter(|(r, _)| r.fixed.is_none())
                        .map(|(_, x)| x[t]),
                )
                .collect()
        })
        .collect();
    // only (X'X)^{-1} is used from the fit
    let design = ols(y, &rows).ok_or_else(|| match regressors {
        [r] => SegfitError::DegeneratePredictor(r.rates.name().to_string(), window),
        _ => SegfitError::CollinearPredictors(window),
    })?;
    let se = |i: usize| (sigma2 * design.xtx_inv[(i, i)]).max(0.0).sqrt();

    let alpha_se = se(0);
    let (mut beta_se, mut gamma_se) = (None, None);
    let mut col = 1;
    for r in regressors {
        let v = if r.fixed.is_some() {
            0.0
        } else {
            col += 1;
            se(col - 1)
        };
        match r.kind {
            PredictorKind::LabourForceChange => beta_se = Some(v),
            PredictorKind::Unemployment => gamma_se = Some(v),
        }
    }
    Ok((alpha_se, beta_se, gamma_se))
}

/// Plain annual OLS of the target on a constant and the lagged predictors
/// over `window`; returns `[intercept, slopes...]`.
pub fn annual_ols(
    obs_rate: &AnnualSeries,
    regressors: &[Regressor<'_>],
    window: YearRange,
) -> Result<Vec<f64>> {
    let y = target_window(obs_rate, window)?;
    let xs: Vec<&[f64]> = regressors
        .iter()
        .map(|r| r.lagged(window))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..y.len())
        .map(|t| {
            std::iter::once(1.0)
                .chain(xs.iter().map(|x| x[t]))
                .collect()
        })
        .collect();
    ols(y, &rows)
        .map(|f| f.coef)
        .ok_or(SegfitError::CollinearPredictors(window))
}

/// One evaluated candidate of the lag/break search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub lags: Vec<i32>,
    pub break_year: Option<i32>,
    #[serde(default)]
    pub sse_cumulative: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub segments: Vec<SegmentCoefficients>,
    pub observed_annual: AnnualSeries,
    pub predicted_annual: AnnualSeries,
    pub residual_annual: AnnualSeries,
    pub observed_cumulative: AnnualSeries,
    pub predicted_cumulative: AnnualSeries,
    /// Years excluded from every error statistic.
    pub in_gap: Vec<i32>,
    pub n_eval: usize,
    pub rmse_annual: f64,
    pub rmse_cumulative: f64,
    pub r2_annual: f64,
    pub r2_cumulative: f64,
    pub sse_cumulative: f64,
    pub free_term_c: f64,
    #[serde(default)]
    pub grid: Vec<GridCell>,
}

impl FitResult {
    /// Predicted minus observed cumulative at each segment's anchor and end.
    pub fn boundary_gaps(&self) -> Vec<(i32, f64)> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let anchor_year = seg.window.start - 1;
            let obs_anchor = if anchor_year < self.spec.fit_window.start {
                0.0
            } else {
                self.observed_cumulative
                    .get(anchor_year)
                    .expect("in window")
            };
            out.push((anchor_year, seg.anchor - obs_anchor));
            let end = seg.window.end;
            out.push((
                end,
                self.predicted_cumulative.get(end).expect("in window")
                    - self.observed_cumulative.get(end).expect("in window"),
            ));
        }
        out
    }

    pub fn lag_of(&self, kind: PredictorKind) -> Option<i32> {
        self.spec
            .predictors
            .iter()
            .find(|p| p.kind == kind)
            .map(|p| p.lag)
    }
}

fn regressors_for<'a>(
    spec: &ModelSpec,
    predictors: &'a [&'a AnnualSeries],
) -> Result<Vec<Regressor<'a>>> {
    if predictors.len() != spec.predictors.len() {
        return Err(SegfitError::InvalidSpec(format!(
            "{} predictor series for {} predictor terms",
            predictors.len(),
            spec.predictors.len()
        )));
    }
    Ok(spec
        .predictors
        .iter()
        .zip(predictors)
        .map(|(p, &rates)| Regressor {
            kind: p.kind,
            rates,
            lag: p.lag,
            fixed: match (p.kind, spec.gamma) {
                (PredictorKind::Unemployment, GammaMode::Fixed(g)) => Some(g),
                _ => None,
            },
        })
        .collect())
}

fn fit_segments(
    spec: &ModelSpec,
    target: &AnnualSeries,
    regs: &[Regressor<'_>],
) -> Result<Vec<SegmentCoefficients>> {
    let window = spec.fit_window;
    let obs = target_window(target, window)?;
    let obs_cum = running_sum(obs);
    spec.segment_windows()
        .into_iter()
        .map(|w| {
            let anchor = if w.start == window.start {
                0.0
            } else {
                obs_cum[(w.start - 1 - window.start) as usize]
            };
            fit_segment(target, regs, w, anchor)
        })
        .collect()
}

/// Fits a fully resolved spec and assembles curves and error statistics.
pub fn fit_resolved(
    spec: &ModelSpec,
    target: &AnnualSeries,
    predictors: &[&AnnualSeries],
) -> Result<FitResult> {
    spec.validate()?;
    let regs = regressors_for(spec, predictors)?;
    let segments = fit_segments(spec, target, &regs)?;
    assemble(spec.clone(), segments, target, &regs)
}

fn assemble(
    spec: ModelSpec,
    segments: Vec<SegmentCoefficients>,
    target: &AnnualSeries,
    regs: &[Regressor<'_>],
) -> Result<FitResult> {
    let window = spec.fit_window;
    let obs = target_window(target, window)?.to_vec();
    let xs: Vec<&[f64]> = regs
        .iter()
        .map(|r| r.lagged(window))
        .collect::<Result<_>>()?;
    let gap = spec.gap();

    let mut pred = Vec::with_capacity(obs.len());
    let mut pred_cum = Vec::with_capacity(obs.len());
    let obs_cum = running_sum(&obs);
    let mut acc = 0.0;
    for (k, year) in window.years().enumerate() {
        let seg_idx = spec.segment_for(year);
        let seg = &segments[seg_idx];
        if year == seg.window.start {
            acc = seg.anchor;
        }
        let p = seg.rate(regs.iter().zip(&xs).map(|(r, x)| (r.kind, x[k])));
        acc += p;
        pred.push(p);
        pred_cum.push(acc);
    }

    let mask: Vec<bool> = window
        .years()
        .map(|y| !gap.is_some_and(|g| g.contains(y)))
        .collect();
    let keep = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(&x, _)| x)
            .collect()
    };
    let resid: Vec<f64> = obs.iter().zip(&pred).map(|(o, p)| o - p).collect();
    let cum_resid: Vec<f64> = obs_cum.iter().zip(&pred_cum).map(|(o, p)| o - p).collect();
    let (obs_k, pred_k) = (keep(&obs), keep(&pred));
    let (ocum_k, pcum_k) = (keep(&obs_cum), keep(&pred_cum));

    let in_gap = gap.map(|g| g.years().collect()).unwrap_or_default();
    let sse_cumulative = segments.iter().map(|s| s.sse_cumulative).sum();
    let name = target.name().to_string();
    let mk = |suffix: &str, unit: Unit, v: Vec<f64>| {
        AnnualSeries::new(format!("{name}.{suffix}"), unit, window.start, v)
    };
    Ok(FitResult {
        n_eval: obs_k.len(),
        rmse_annual: accuracy::rms(&keep(&resid)),
        rmse_cumulative: accuracy::rms(&keep(&cum_resid)),
        r2_annual: accuracy::r_squared_slices(&obs_k, &pred_k).unwrap_or(f64::NAN),
        r2_cumulative: accuracy::r_squared_slices(&ocum_k, &pcum_k).unwrap_or(f64::NAN),
        sse_cumulative,
        observed_annual: mk("observed", Unit::FractionPerYear, obs)?,
        predicted_annual: mk("predicted", Unit::FractionPerYear, pred)?,
        residual_annual: mk("residual", Unit::FractionPerYear, resid)?,
        observed_cumulative: mk("observed_cumulative", Unit::Level, obs_cum)?,
        predicted_cumulative: mk("predicted_cumulative", Unit::Level, pred_cum)?,
        in_gap,
        free_term_c: 0.0,
        grid: Vec::new(),
        spec,
        segments,
    })
}

/// Closed integer range, `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: i32,
    pub hi: i32,
}

impl IntRange {
    pub fn new(lo: i32, hi: i32) -> Self {
        Self { lo, hi }
    }

    pub fn single(v: i32) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn values(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }
}

pub const DEFAULT_LAG_RANGE: IntRange = IntRange { lo: 0, hi: 3 };
pub const DEFAULT_BREAK_RANGE: IntRange = IntRange { lo: 1980, hi: 1990 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSearch {
    pub series_id: String,
    pub kind: PredictorKind,
    pub lags: IntRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "years")]
pub enum BreakSearch {
    None,
    Fixed(i32),
    Range(IntRange),
}

/// A model with lag and break ranges still to be searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub target_id: String,
    pub predictors: Vec<PredictorSearch>,
    pub breaks: BreakSearch,
    pub fit_window: YearRange,
    #[serde(default)]
    pub excluded_interval: Option<YearRange>,
    #[serde(default)]
    pub gamma: GammaMode,
}

impl SearchSpec {
    fn candidates(&self) -> Vec<ModelSpec> {
        let mut lag_sets: Vec<Vec<i32>> = vec![Vec::new()];
        for p in &self.predictors {
            lag_sets = lag_sets
                .into_iter()
                .flat_map(|prefix| {
                    p.lags.values().map(move |l| {
                        let mut v = prefix.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        let breaks: Vec<Option<i32>> = match self.breaks {
            BreakSearch::None => vec![None],
            BreakSearch::Fixed(b) => vec![Some(b)],
            BreakSearch::Range(r) => r.values().map(Some).collect(),
        };
        let mut out = Vec::new();
        for lags in &lag_sets {
            for &break_year in &breaks {
                out.push(ModelSpec {
                    target_id: self.target_id.clone(),
                    predictors: self
                        .predictors
                        .iter()
                        .zip(lags)
                        .map(|(p, &lag)| PredictorTerm {
                            series_id: p.series_id.clone(),
                            kind: p.kind,
                            lag,
                        })
                        .collect(),
                    break_year,
                    fit_window: self.fit_window,
                    excluded_interval: self.excluded_interval,
                    gamma: self.gamma,
                });
            }
        }
        out
    }
}

/// Exhaustive search over lags and break years.
///
/// Candidates are visited lags-first (lexicographic, ascending), then break
/// years ascending, and a later candidate only wins with a strictly smaller
/// cumulative SSE. Candidates whose spec is invalid for the window or whose
/// fit fails are recorded in the grid with their error and skipped; if none
/// succeeds the first failure is returned.
pub fn fit_model(
    search: &SearchSpec,
    target: &AnnualSeries,
    predictors: &[&AnnualSeries],
) -> Result<FitResult> {
    if search.predictors.is_empty() {
        return Err(SegfitError::InvalidSpec("no predictors".into()));
    }
    let candidates = search.candidates();
    if candidates.is_empty() {
        return Err(SegfitError::EmptyGrid);
    }
    let mut grid = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64, Vec<SegmentCoefficients>)> = None;
    let mut first_err = None;
    for (i, spec) in candidates.iter().enumerate() {
        let outcome = spec.validate().and_then(|_| {
            let regs = regressors_for(spec, predictors)?;
            fit_segments(spec, target, &regs)
        });
        let lags = spec.predictors.iter().map(|p| p.lag).collect();
        match outcome {
            Ok(segs) => {
                let sse: f64 = segs.iter().map(|s| s.sse_cumulative).sum();
                grid.push(GridCell {
                    lags,
                    break_year: spec.break_year,
                    sse_cumulative: Some(sse),
                    error: None,
                });
                if best.as_ref().is_none_or(|(_, b, _)| sse < *b) {
                    best = Some((i, sse, segs));
                }
            }
            Err(e) => {
                grid.push(GridCell {
                    lags,
                    break_year: spec.break_year,
                    sse_cumulative: None,
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((i, _, segs)) = best else {
        return Err(first_err.unwrap_or(SegfitError::EmptyGrid));
    };
    let spec = candidates[i].clone();
    let regs = regressors_for(&spec, predictors)?;
    let mut fit = assemble(spec, segs, target, &regs)?;
    fit.grid = grid;
    Ok(fit)
}

/// Two-regime unemployment model with a transition interval dropped from the
/// fit: labour-force change at lag 0, the earlier segment ending just before
/// `excluded` and the later one starting just after it.
pub fn fit_unemployment(
    target: &AnnualSeries,
    labour_force_change: &AnnualSeries,
    fit_window: YearRange,
    excluded: YearRange,
) -> Result<FitResult> {
    let spec = ModelSpec {
        target_id: target.name().to_string(),
        predictors: vec![PredictorTerm {
            series_id: labour_force_change.name().to_string(),
            kind: PredictorKind::LabourForceChange,
            lag: 0,
        }],
        break_year: Some(excluded.start - 1),
        fit_window,
        excluded_interval: Some(excluded),
        gamma: GammaMode::Free,
    };
    fit_resolved(&spec, target, &[labour_force_change])
}

/// Bivariate model with a labour-force and an unemployment predictor.
pub fn fit_generalized(
    search: &SearchSpec,
    target: &AnnualSeries,
    predictors: &[&AnnualSeries],
) -> Result<FitResult> {
    let kinds: Vec<PredictorKind> = search.predictors.iter().map(|p| p.kind).collect();
    if !(kinds.contains(&PredictorKind::LabourForceChange)
        && kinds.contains(&PredictorKind::Unemployment)
        && kinds.len() == 2)
    {
        return Err(SegfitError::InvalidSpec(
            "generalized model needs one labour-force and one unemployment predictor".into(),
        ));
    }
    fit_model(search, target, predictors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rates(name: &str, first: i32, v: Vec<f64>) -> AnnualSeries {
        AnnualSeries::new(name, Unit::FractionPerYear, first, v).unwrap()
    }

    fn wiggle(first: i32, n: usize) -> AnnualSeries {
        rates(
            "l",
            first,
            (0..n)
                .map(|i| {
                    0.01 + 0.01 * ((i as f64) * 1.3).sin() + 0.004 * ((i * i) as f64 * 0.7).cos()
                })
                .collect(),
        )
    }

    fn lf(r: &AnnualSeries, lag: i32) -> Regressor<'_> {
        Regressor {
            kind: PredictorKind::LabourForceChange,
            rates: r,
            lag,
            fixed: None,
        }
    }

    #[test]
    fn exact_model_is_recovered() {
        let l = wiggle(1960, 40);
        let pi = l.map(|v| 0.03 + 2.5 * v).unwrap();
        let seg = fit_segment(&pi, &[lf(&l, 0)], YearRange::new(1962, 1995), 0.0).unwrap();
        assert_relative_eq!(seg.beta.unwrap(), 2.5, epsilon = 1e-10);
        assert_relative_eq!(seg.alpha, 0.03, epsilon = 1e-10);
        assert!(seg.sse_cumulative < 1e-20);
        assert!(seg.alpha_se <= 1e-8 && seg.beta_se.unwrap() <= 1e-8);
    }

    #[test]
    fn lagged_exact_model() {
        let l = wiggle(1960, 40);
        let pi = rates(
            "pi",
            1962,
            (1962..2000)
                .map(|t| 0.01 + 1.7 * l.get(t - 2).unwrap())
                .collect(),
        );
        let seg = fit_segment(&pi, &[lf(&l, 2)], YearRange::new(1965, 1999), 0.4).unwrap();
        assert_relative_eq!(seg.beta.unwrap(), 1.7, epsilon = 1e-10);
        assert_relative_eq!(seg.alpha, 0.01, epsilon = 1e-10);
        assert_eq!(seg.anchor, 0.4);
    }

    #[test]
    fn zero_predictor_is_degenerate() {
        let zero = rates("zero", 1960, vec![0.0; 20]);
        let pi = rates("pi", 1960, vec![0.02; 20]);
        assert!(matches!(
            fit_segment(&pi, &[lf(&zero, 0)], YearRange::new(1960, 1979), 0.0),
            Err(SegfitError::DegeneratePredictor(..))
        ));
        let constant = rates("c", 1960, vec![0.01; 20]);
        assert!(matches!(
            fit_segment(&pi, &[lf(&constant, 0)], YearRange::new(1960, 1979), 0.0),
            Err(SegfitError::DegeneratePredictor(..))
        ));
    }

    #[test]
    fn short_windows_are_rejected() {
        let l = wiggle(1960, 20);
        let u = wiggle(1960, 20).renamed("u");
        let w2 = YearRange::new(1961, 1962);
        assert!(matches!(
            fit_segment(&l, &[lf(&l, 0)], w2, 0.0),
            Err(SegfitError::WindowTooShort { needed: 3, .. })
        ));
        let two = [
            lf(&l, 0),
            Regressor {
                kind: PredictorKind::Unemployment,
                rates: &u,
                lag: 0,
                fixed: None,
            },
        ];
        assert!(matches!(
            fit_segment(&l, &two, YearRange::new(1961, 1963), 0.0),
            Err(SegfitError::WindowTooShort { needed: 4, .. })
        ));
    }

    #[test]
    fn missing_lagged_data() {
        let l = wiggle(1960, 20);
        let pi = wiggle(1960, 20);
        assert!(matches!(
            fit_segment(&pi, &[lf(&l, 2)], YearRange::new(1961, 1970), 0.0),
            Err(SegfitError::InsufficientData { .. })
        ));
    }

    #[test]
    fn collinear_pair() {
        let l = wiggle(1960, 30);
        let u = l.map(|v| 3.0 * v).unwrap().renamed("u");
        let pi = l.map(|v| 0.01 + v).unwrap();
        let regs = [
            lf(&l, 0),
            Regressor {
                kind: PredictorKind::Unemployment,
                rates: &u,
                lag: 0,
                fixed: None,
            },
        ];
        assert!(matches!(
            fit_segment(&pi, &regs, YearRange::new(1960, 1989), 0.0),
            Err(SegfitError::CollinearPredictors(_))
        ));
    }

    fn spec(break_year: Option<i32>, excluded: Option<YearRange>) -> ModelSpec {
        ModelSpec {
            target_id: "pi".into(),
            predictors: vec![PredictorTerm {
                series_id: "l".into(),
                kind: PredictorKind::LabourForceChange,
                lag: 0,
            }],
            break_year,
            fit_window: YearRange::new(1965, 2012),
            excluded_interval: excluded,
            gamma: GammaMode::Free,
        }
    }

    #[test]
    fn segment_layout() {
        let s = spec(Some(1986), None);
        assert_eq!(
            s.segment_windows(),
            vec![YearRange::new(1965, 1986), YearRange::new(1987, 2012)]
        );
        assert_eq!(s.gap(), None);
        assert_eq!(s.segment_for(1986), 0);
        assert_eq!(s.segment_for(1987), 1);
        assert_eq!(s.segment_for(2030), 1);

        let g = spec(Some(1981), Some(YearRange::new(1982, 1986)));
        assert_eq!(
            g.segment_windows(),
            vec![YearRange::new(1965, 1981), YearRange::new(1987, 2012)]
        );
        assert_eq!(g.gap(), Some(YearRange::new(1982, 1986)));
        assert_eq!(g.segment_for(1984), 0);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(Some(1986), None).validate().is_ok());
        assert!(spec(Some(1965), None).validate().is_err());
        assert!(spec(Some(2012), None).validate().is_err());
        assert!(spec(None, Some(YearRange::new(1982, 1986)))
            .validate()
            .is_err());
        assert!(spec(Some(1975), Some(YearRange::new(1982, 1986)))
            .validate()
            .is_err());
        assert!(spec(Some(1986), Some(YearRange::new(1982, 1986)))
            .validate()
            .is_ok());
        let mut neg = spec(None, None);
        neg.predictors[0].lag = -1;
        assert!(neg.validate().is_err());
        neg.predictors[0].kind = PredictorKind::Unemployment;
        assert!(neg.validate().is_ok());
        neg.predictors[0].lag = -6;
        assert!(neg.validate().is_err());
    }

    #[test]
    fn boundary_conditions_hold_on_noisy_fit() {
        let l = wiggle(1960, 60);
        let pi = rates(
            "pi",
            1960,
            (0..60)
                .map(|i| {
                    let t = 1960 + i;
                    let (a, b) = if t <= 1986 {
                        (0.0484, 3.846)
                    } else {
                        (0.0, 2.383)
                    };
                    a + b * l.values()[i as usize] + 0.003 * ((i * 7) as f64).sin()
                })
                .collect(),
        );
        let fit = fit_resolved(&spec(Some(1986), None), &pi, &[&l]).unwrap();
        for (year, gap) in fit.boundary_gaps() {
            assert!(gap.abs() <= 1e-10, "{year}: {gap}");
        }
        let count = fit.n_eval as f64;
        let ss: f64 = fit.residual_annual.values().iter().map(|e| e * e).sum();
        assert_relative_eq!(ss, fit.rmse_annual.powi(2) * count, max_relative = 1e-12);
    }

    #[test]
    fn excluded_years_are_dropped_from_statistics() {
        let l = wiggle(1960, 60);
        let u = rates(
            "u",
            1960,
            (0..60)
                .map(|i| {
                    let t = 1960 + i;
                    let lv = l.values()[i as usize];
                    match t {
                        ..=1981 => 0.026 + 0.35 * lv,
                        1982..=1986 => 0.5,
                        _ => 0.0705 + 0.70 * lv,
                    }
                })
                .collect(),
        );
        let fit = fit_unemployment(
            &u,
            &l,
            YearRange::new(1965, 2012),
            YearRange::new(1982, 1986),
        )
        .unwrap();
        assert_eq!(fit.in_gap, vec![1982, 1983, 1984, 1985, 1986]);
        assert_eq!(fit.n_eval, 48 - 5);
        assert_relative_eq!(fit.segments[0].beta.unwrap(), 0.35, epsilon = 1e-10);
        assert_relative_eq!(fit.segments[0].alpha, 0.026, epsilon = 1e-10);
        assert_relative_eq!(fit.segments[1].beta.unwrap(), 0.70, epsilon = 1e-10);
        assert_relative_eq!(fit.segments[1].alpha, 0.0705, epsilon = 1e-10);
        assert!(fit.rmse_annual < 1e-10);
        // segment 2 restarts from the observed cumulative at 1986
        assert_relative_eq!(
            fit.segments[1].anchor,
            fit.observed_cumulative.get(1986).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn grid_prefers_smaller_lag_on_ties() {
        // a constant target is fitted perfectly by alpha alone whatever the lag
        let l = wiggle(1955, 40);
        let pi = rates("pi", 1960, vec![0.02; 30]);
        let search = SearchSpec {
            target_id: "pi".into(),
            predictors: vec![PredictorSearch {
                series_id: "l".into(),
                kind: PredictorKind::LabourForceChange,
                lags: IntRange::new(0, 3),
            }],
            breaks: BreakSearch::Range(IntRange::new(1970, 1975)),
            fit_window: YearRange::new(1960, 1989),
            excluded_interval: None,
            gamma: GammaMode::Free,
        };
        let fit = fit_model(&search, &pi, &[&l]).unwrap();
        assert_eq!(fit.grid.len(), 24);
        let best = fit
            .grid
            .iter()
            .filter_map(|c| c.sse_cumulative)
            .fold(f64::INFINITY, f64::min);
        let first_best = fit
            .grid
            .iter()
            .find(|c| c.sse_cumulative == Some(best))
            .unwrap();
        assert_eq!(fit.spec.predictors[0].lag, first_best.lags[0]);
        assert_eq!(fit.spec.break_year, first_best.break_year);
    }

    #[test]
    fn empty_grid() {
        let l = wiggle(1955, 40);
        let search = SearchSpec {
            target_id: "pi".into(),
            predictors: vec![PredictorSearch {
                series_id: "l".into(),
                kind: PredictorKind::LabourForceChange,
                lags: IntRange::new(2, 1),
            }],
            breaks: BreakSearch::None,
            fit_window: YearRange::new(1960, 1989),
            excluded_interval: None,
            gamma: GammaMode::Free,
        };
        assert_eq!(fit_model(&search, &l, &[&l]), Err(SegfitError::EmptyGrid));
    }

    #[test]
    fn pinned_gamma_matches_moved_term() {
        let l = wiggle(1960, 40);
        let u = rates(
            "u",
            1960,
            (0..40)
                .map(|i| 0.04 + 0.01 * (i as f64 * 0.4).cos())
                .collect(),
        );
        let pi = rates(
            "pi",
            1960,
            (0..40)
                .map(|i| {
                    0.06 + 1.1 * l.values()[i] - u.values()[i] + 0.002 * ((i * 5) as f64).sin()
                })
                .collect(),
        );
        let w = YearRange::new(1960, 1999);
        let pinned = fit_segment(
            &pi,
            &[
                lf(&l, 0),
                Regressor {
                    kind: PredictorKind::Unemployment,
                    rates: &u,
                    lag: 0,
                    fixed: Some(-1.0),
                },
            ],
            w,
            0.0,
        )
        .unwrap();
        let moved = rates(
            "pi+u",
            1960,
            pi.values()
                .iter()
                .zip(u.values())
                .map(|(p, u)| p + u)
                .collect(),
        );
        let single = fit_segment(&moved, &[lf(&l, 0)], w, 0.0).unwrap();
        assert_relative_eq!(pinned.beta.unwrap(), single.beta.unwrap(), epsilon = 1e-12);
        assert_relative_eq!(pinned.alpha, single.alpha, epsilon = 1e-12);
        assert_eq!(pinned.gamma, Some(-1.0));
        assert!(pinned.gamma_fixed);
        assert_eq!(pinned.gamma_se, Some(0.0));
    }
}
