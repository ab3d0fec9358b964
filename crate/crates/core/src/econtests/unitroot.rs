use super::critical;
use super::{Deterministic, Result, Statistic, Tail, TestError, TestReport};
use crate::ols::ols;
use crate::series::{AnnualSeries, CumulativeSeries};

/// Number of lagged differences in the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdfLag {
    Fixed(usize),
    /// Minimum AIC over `0..=max_lag` on a common sample. `None` uses
    /// `floor(12 (n/100)^(1/4))`.
    Aic {
        max_lag: Option<usize>,
    },
}

/// Newey-West truncation lag for the Phillips-Perron correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    Fixed(usize),
    /// `floor(4 (n/100)^(2/9))` with `n` the regression sample size.
    Auto,
}

pub(crate) struct DfRegression {
    /// Coefficient on the lagged level, i.e. `rho - 1`.
    pub gamma: f64,
    pub se_gamma: f64,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub nobs: usize,
    pub k: usize,
}

/// `dx_t = gamma x_{t-1} + det + sum_{i=1..p} phi_i dx_{t-i}` for
/// `t = first..len`, `first >= p + 1`.
pub(crate) fn df_regression(
    x: &[f64],
    p: usize,
    det: Deterministic,
    first: usize,
) -> Result<DfRegression> {
    debug_assert!(first > p);
    let dx: Vec<f64> = std::iter::once(f64::NAN)
        .chain(x.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for t in first..x.len() {
        let mut row = vec![x[t - 1], 1.0];
        if det == Deterministic::ConstantTrend {
            row.push(t as f64);
        }
        row.extend((1..=p).map(|i| dx[t - i]));
        rows.push(row);
        y.push(dx[t]);
    }
    let fit = ols(&y, &rows)
        .ok_or_else(|| TestError::Degenerate("singular Dickey-Fuller design".into()))?;
    if fit.ssr <= 0.0 {
        return Err(TestError::Degenerate(
            "Dickey-Fuller regression fits exactly".into(),
        ));
    }
    Ok(DfRegression {
        gamma: fit.coef[0],
        se_gamma: fit.std_err(0),
        ssr: fit.ssr,
        nobs: fit.nobs,
        k: fit.coef.len(),
        residuals: fit.residuals,
    })
}

fn check_variance(x: &[f64]) -> Result<()> {
    let first = x[0];
    if x.iter().all(|&v| v == first) {
        return Err(TestError::ZeroVariance);
    }
    Ok(())
}

fn schwert_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub(crate) fn adf_slice(x: &[f64], lag: AdfLag, det: Deterministic) -> Result<TestReport> {
    let max_lag = match lag {
        AdfLag::Fixed(p) => p,
        AdfLag::Aic { max_lag: Some(m) } => m,
        AdfLag::Aic { max_lag: None } => schwert_lag(x.len()).min(x.len().saturating_sub(10)),
    };
    if x.len() < max_lag + 10 {
        return Err(TestError::TooShort {
            len: x.len(),
            needed: max_lag + 10,
        });
    }
    check_variance(x)?;
    let p = match lag {
        AdfLag::Fixed(p) => p,
        AdfLag::Aic { .. } => {
            let mut best = (0, f64::INFINITY);
            for p in 0..=max_lag {
                let r = df_regression(x, p, det, max_lag + 1)?;
                let n = r.nobs as f64;
                let aic = n * (r.ssr / n).ln() + 2.0 * r.k as f64;
                if aic < best.1 {
                    best = (p, aic);
                }
            }
            best.0
        }
    };
    let r = df_regression(x, p, det, p + 1)?;
    let tau = r.gamma / r.se_gamma;
    Ok(TestReport {
        test_name: "adf".into(),
        statistics: vec![Statistic::new(
            "tau",
            tau,
            Tail::Left,
            critical::tau(det, r.nobs),
        )],
        lag_order: Some(p),
        bandwidth: None,
        deterministic: Some(det),
        n_obs: r.nobs,
        eigenvalues: Vec::new(),
    })
}

/// Augmented Dickey-Fuller test on the lagged-level coefficient.
pub fn adf_test(x: &AnnualSeries, lag: AdfLag, det: Deterministic) -> Result<TestReport> {
    adf_slice(x.values(), lag, det)
}

pub(crate) fn pp_slice(x: &[f64], bandwidth: Bandwidth, det: Deterministic) -> Result<TestReport> {
    if x.len() < 15 {
        return Err(TestError::TooShort {
            len: x.len(),
            needed: 15,
        });
    }
    check_variance(x)?;
    let r = df_regression(x, 0, det, 1)?;
    let n = r.nobs as f64;
    let e = &r.residuals;
    let q = match bandwidth {
        Bandwidth::Fixed(q) => q,
        Bandwidth::Auto => (4.0 * (n / 100.0).powf(2.0 / 9.0)).floor() as usize,
    };
    let autocov = |j: usize| e[j..].iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / n;
    let gamma0 = autocov(0);
    let lambda2 = gamma0
        + 2.0
            * (1..=q.min(e.len() - 1))
                .map(|j| (1.0 - j as f64 / (q + 1) as f64) * autocov(j))
                .sum::<f64>();
    if lambda2 <= 0.0 {
        return Err(TestError::Degenerate(
            "non-positive long-run variance".into(),
        ));
    }
    let s2 = r.ssr / (n - r.k as f64);
    let s = s2.sqrt();
    let lambda = lambda2.sqrt();
    let se = r.se_gamma;
    let z_rho = n * r.gamma - 0.5 * (n * n * se * se / s2) * (lambda2 - gamma0);
    let z_t = (gamma0 / lambda2).sqrt() * (r.gamma / se)
        - 0.5 * (lambda2 - gamma0) / lambda * (n * se / s);
    Ok(TestReport {
        test_name: "phillips_perron".into(),
        statistics: vec![
            Statistic::new("z_rho", z_rho, Tail::Left, critical::rho(det, r.nobs)),
            Statistic::new("z_t", z_t, Tail::Left, critical::tau(det, r.nobs)),
        ],
        lag_order: None,
        bandwidth: Some(q),
        deterministic: Some(det),
        n_obs: r.nobs,
        eigenvalues: Vec::new(),
    })
}

/// Phillips-Perron `Z(rho)` and `Z(t)` with a Bartlett-kernel long-run
/// variance.
pub fn pp_test(x: &AnnualSeries, bandwidth: Bandwidth, det: Deterministic) -> Result<TestReport> {
    pp_slice(x.values(), bandwidth, det)
}

/// ADF and PP (constant only) on the plain difference `obs - pred` of two
/// cumulative curves. The difference is not a regression residual, so the
/// ordinary Dickey-Fuller tables apply.
pub fn residual_cointegration(
    obs_cum: &CumulativeSeries,
    pred_cum: &CumulativeSeries,
    lag: AdfLag,
    bandwidth: Bandwidth,
) -> Result<TestReport> {
    if obs_cum.range() != pred_cum.range() {
        return Err(TestError::RangeMismatch);
    }
    let diff: Vec<f64> = obs_cum
        .values()
        .iter()
        .zip(pred_cum.values())
        .map(|(o, p)| o - p)
        .collect();
    let adf = adf_slice(&diff, lag, Deterministic::Constant)?;
    let pp = pp_slice(&diff, bandwidth, Deterministic::Constant)?;
    let rename = |mut s: Statistic, prefix: &str| {
        s.name = format!("{prefix}_{}", s.name);
        s
    };
    let mut statistics: Vec<Statistic> = adf
        .statistics
        .into_iter()
        .map(|s| rename(s, "adf"))
        .collect();
    statistics.extend(pp.statistics.into_iter().map(|s| rename(s, "pp")));
    Ok(TestReport {
        test_name: "residual_cointegration".into(),
        statistics,
        lag_order: adf.lag_order,
        bandwidth: pp.bandwidth,
        deterministic: Some(Deterministic::Constant),
        n_obs: adf.n_obs,
        eigenvalues: Vec::new(),
    })
}
