//! Ordinary least squares on small dense designs.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    /// `(X'X)^{-1}`; multiply by `sigma2` for the coefficient covariance.
    pub xtx_inv: DMatrix<f64>,
    pub nobs: usize,
}

impl OlsFit {
    /// Residual variance with `nobs - k` degrees of freedom.
    pub fn sigma2(&self) -> f64 {
        self.ssr / (self.nobs - self.coef.len()) as f64
    }

    pub fn std_err(&self, i: usize) -> f64 {
        (self.sigma2() * self.xtx_inv[(i, i)]).sqrt()
    }

    pub fn t_stat(&self, i: usize) -> f64 {
        self.coef[i] / self.std_err(i)
    }
}

/// Fits `y = X b` by Householder QR. Returns `None` when `X` is rank
/// deficient or has no residual degrees of freedom.
pub fn ols(y: &[f64], rows: &[Vec<f64>]) -> Option<OlsFit> {
    let n = y.len();
    let k = rows.first().map_or(0, Vec::len);
    if n != rows.len() || k == 0 || n <= k {
        return None;
    }
    let x = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= scale * 1e-12) {
        return None;
    }
    let qty = qr.q().transpose() * &yv;
    let coef = r.solve_upper_triangular(&qty.rows(0, k).into_owned())?;
    let rinv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    let xtx_inv = &rinv * rinv.transpose();
    let fitted = &x * &coef;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let ssr = residuals.iter().map(|e| e * e).sum();
    Some(OlsFit {
        coef: coef.iter().copied().collect(),
        residuals,
        ssr,
        xtx_inv,
        nobs: n,
    })
}
