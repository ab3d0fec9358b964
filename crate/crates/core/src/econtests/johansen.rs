use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use super::critical::JOHANSEN_TRACE;
use super::{Result, Statistic, Tail, TestError, TestReport};
use crate::ols::ols;
use crate::series::CumulativeSeries;

/// Residuals of each column of `ys` after OLS on `rows`.
fn partial_out(ys: &[[f64; 2]], rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
    let mut out = vec![[0.0; 2]; ys.len()];
    for c in 0..2 {
        let y: Vec<f64> = ys.iter().map(|v| v[c]).collect();
        let fit = ols(&y, rows).ok_or(TestError::SingularMoments)?;
        for (o, e) in out.iter_mut().zip(fit.residuals) {
            o[c] = e;
        }
    }
    Ok(out)
}

fn moments(a: &[[f64; 2]], b: &[[f64; 2]]) -> Matrix2<f64> {
    let t = a.len() as f64;
    Matrix2::from_fn(|i, j| a.iter().zip(b).map(|(x, y)| x[i] * y[j]).sum::<f64>() / t)
}

/// Trace test for the cointegration rank of two series in a VECM with
/// `var_lag` lagged differences and an unrestricted constant.
///
/// Statistics `trace_r0` (H0: r = 0) and `trace_r1` (H0: r <= 1) are
/// right-tailed. Eigenvalues are reported in descending order.
pub fn johansen_trace(
    a: &CumulativeSeries,
    b: &CumulativeSeries,
    var_lag: usize,
) -> Result<TestReport> {
    if a.range() != b.range() {
        return Err(TestError::RangeMismatch);
    }
    let n = a.values().len();
    if n < 20 || n < var_lag + 10 {
        return Err(TestError::TooShort {
            len: n,
            needed: 20.max(var_lag + 10),
        });
    }
    let y: Vec<[f64; 2]> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&p, &q)| [p, q])
        .collect();
    let dy: Vec<[f64; 2]> = y
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .collect();

    // dependent index t runs over var_lag+1 .. n-1; dy[t-1] is the difference ending at t
    let first = var_lag + 1;
    let z0: Vec<[f64; 2]> = (first..n).map(|t| dy[t - 1]).collect();
    let z1: Vec<[f64; 2]> = (first..n).map(|t| y[t - 1]).collect();
    let rows: Vec<Vec<f64>> = (first..n)
        .map(|t| {
            let mut r = vec![1.0];
            for i in 1..=var_lag {
                r.extend_from_slice(&dy[t - 1 - i]);
            }
            r
        })
        .collect();
    let r0 = partial_out(&z0, &rows)?;
    let r1 = partial_out(&z1, &rows)?;
    let t_eff = r0.len() as f64;

    let s00 = moments(&r0, &r0);
    let s11 = moments(&r1, &r1);
    let s01 = moments(&r0, &r1);
    let s00_inv = s00.try_inverse().ok_or(TestError::SingularMoments)?;
    let chol = s11.cholesky().ok_or(TestError::SingularMoments)?;
    let l_inv = chol.l().try_inverse().ok_or(TestError::SingularMoments)?;
    let m = l_inv * s01.transpose() * s00_inv * s01 * l_inv.transpose();
    let sym = DMatrix::from_fn(2, 2, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut eig: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0 - 1e-15))
        .collect();
    eig.sort_by(|p, q| q.total_cmp(p));

    let trace_r1 = -t_eff * (1.0 - eig[1]).ln();
    let trace_r0 = -t_eff * (1.0 - eig[0]).ln() + trace_r1;
    Ok(TestReport {
        test_name: "johansen_trace".into(),
        statistics: vec![
            Statistic::new("trace_r0", trace_r0, Tail::Right, JOHANSEN_TRACE[0]),
            Statistic::new("trace_r1", trace_r1, Tail::Right, JOHANSEN_TRACE[1]),
        ],
        lag_order: Some(var_lag),
        bandwidth: None,
        deterministic: None,
        n_obs: r0.len(),
        eigenvalues: eig,
    })
}

/// Rank chosen by the sequential trace procedure at `significance`.
pub fn johansen_rank(report: &TestReport, significance: super::Significance) -> usize {
    match (
        report.rejects("trace_r0", significance),
        report.rejects("trace_r1", significance),
    ) {
        (Some(false), _) | (None, _) => 0,
        (Some(true), Some(false)) | (Some(true), None) => 1,
        (Some(true), Some(true)) => 2,
    }
}
