//! Fit and forecast accuracy: RMSE, R², and no-change benchmarks.

use super::{Result, TestError};
use crate::ols::ols;
use crate::series::AnnualSeries;

/// Root mean square of a slice; 0 for an empty slice.
pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn rmse(residual: &AnnualSeries) -> f64 {
    rms(residual.values())
}

/// `1 - SSE/SST` on paired slices.
pub fn r_squared_slices(obs: &[f64], pred: &[f64]) -> Result<f64> {
    if obs.is_empty() || obs.len() != pred.len() {
        return Err(TestError::RangeMismatch);
    }
    let mean = obs.iter().sum::<f64>() / obs.len() as f64;
    let sst: f64 = obs.iter().map(|o| (o - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(TestError::ZeroVariance);
    }
    let sse: f64 = obs.iter().zip(pred).map(|(o, p)| (o - p).powi(2)).sum();
    Ok(1.0 - sse / sst)
}

/// R² over the years both series cover.
pub fn r_squared(obs: &AnnualSeries, pred: &AnnualSeries) -> Result<f64> {
    let overlap = obs
        .range()
        .intersect(&pred.range())
        .ok_or(TestError::RangeMismatch)?;
    r_squared_slices(
        obs.window(overlap).expect("overlap"),
        pred.window(overlap).expect("overlap"),
    )
}

fn check_horizon(x: &AnnualSeries, h: usize) -> Result<()> {
    if h == 0 || x.len() <= h {
        return Err(TestError::TooShort {
            len: x.len(),
            needed: h.max(1) + 1,
        });
    }
    Ok(())
}

/// RMS of `x(t) - x(t - h)` over every `t` with both values: the error of
/// forecasting each year with the value observed `h` years earlier.
pub fn naive_rmsfe(x: &AnnualSeries, h: usize) -> Result<f64> {
    check_horizon(x, h)?;
    let v = x.values();
    let diffs: Vec<f64> = (h..v.len()).map(|t| v[t] - v[t - h]).collect();
    Ok(rms(&diffs))
}

/// Like [`naive_rmsfe`], restricted to target years inside `[from, to]`.
pub fn naive_rmsfe_window(x: &AnnualSeries, h: usize, from: i32, to: i32) -> Result<f64> {
    check_horizon(x, h)?;
    let diffs: Vec<f64> = (from..=to)
        .filter_map(|t| Some(x.get(t)? - x.get(t - h as i32)?))
        .collect();
    if diffs.is_empty() {
        return Err(TestError::TooShort { len: 0, needed: 1 });
    }
    Ok(rms(&diffs))
}

/// In-sample RMS error of the direct `h`-step autoregression
/// `x(t) = c + phi * x(t - h)` fitted by OLS.
pub fn ar1_rmsfe(x: &AnnualSeries, h: usize) -> Result<f64> {
    check_horizon(x, h)?;
    let v = x.values();
    if v.len() < h + 3 {
        return Err(TestError::TooShort {
            len: v.len(),
            needed: h + 3,
        });
    }
    let y: Vec<f64> = v[h..].to_vec();
    let rows: Vec<Vec<f64>> = v[..v.len() - h].iter().map(|&p| vec![1.0, p]).collect();
    let fit = ols(&y, &rows).ok_or(TestError::ZeroVariance)?;
    Ok(rms(&fit.residuals))
}
