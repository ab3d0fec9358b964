//! Embedded critical-value tables.
//!
//! Dickey-Fuller tables are the finite-sample quantiles of Fuller (1976),
//! as reprinted in Hamilton (1994) Tables B.5 and B.6, interpolated linearly
//! in the regression sample size between the tabulated sizes and linearly in
//! `1/n` beyond 500. Johansen trace quantiles for the unrestricted-constant
//! case with two variables are those of MacKinnon, Haug and Michelis (1999).

use super::{Deterministic, Levels};

const SIZES: [f64; 5] = [25.0, 50.0, 100.0, 250.0, 500.0];

/// Rows: sample sizes 25, 50, 100, 250, 500, infinity. Columns: 1%, 5%, 10%.
type Table = [[f64; 3]; 6];

const TAU_CONSTANT: Table = [
    [-3.75, -3.00, -2.63],
    [-3.58, -2.93, -2.60],
    [-3.51, -2.89, -2.58],
    [-3.46, -2.88, -2.57],
    [-3.44, -2.87, -2.57],
    [-3.43, -2.86, -2.57],
];

const TAU_TREND: Table = [
    [-4.38, -3.60, -3.24],
    [-4.15, -3.50, -3.18],
    [-4.04, -3.45, -3.15],
    [-3.99, -3.43, -3.13],
    [-3.98, -3.42, -3.13],
    [-3.96, -3.41, -3.12],
];

const RHO_CONSTANT: Table = [
    [-17.2, -12.5, -10.2],
    [-18.9, -13.3, -10.7],
    [-19.8, -13.7, -11.0],
    [-20.3, -14.0, -11.2],
    [-20.5, -14.0, -11.2],
    [-20.7, -14.1, -11.3],
];

const RHO_TREND: Table = [
    [-22.5, -17.9, -15.6],
    [-25.7, -19.8, -16.8],
    [-27.4, -20.7, -17.5],
    [-28.4, -21.3, -18.0],
    [-28.9, -21.5, -18.1],
    [-29.5, -21.8, -18.3],
];

fn interpolate(table: &Table, n: usize) -> Levels<f64> {
    let n = n as f64;
    let row = |i: usize| Levels {
        p01: table[i][0],
        p05: table[i][1],
        p10: table[i][2],
    };
    let mix = |a: Levels<f64>, b: Levels<f64>, w: f64| Levels {
        p01: a.p01 + w * (b.p01 - a.p01),
        p05: a.p05 + w * (b.p05 - a.p05),
        p10: a.p10 + w * (b.p10 - a.p10),
    };
    if n <= SIZES[0] {
        return row(0);
    }
    for i in 0..SIZES.len() - 1 {
        if n <= SIZES[i + 1] {
            let w = (n - SIZES[i]) / (SIZES[i + 1] - SIZES[i]);
            return mix(row(i), row(i + 1), w);
        }
    }
    // between 500 and infinity, linear in 1/n
    let w = 1.0 - SIZES[4] / n;
    mix(row(4), row(5), w)
}

/// Critical values of the Dickey-Fuller t statistic (ADF tau, PP Z(t)).
pub fn tau(det: Deterministic, nobs: usize) -> Levels<f64> {
    match det {
        Deterministic::Constant => interpolate(&TAU_CONSTANT, nobs),
        Deterministic::ConstantTrend => interpolate(&TAU_TREND, nobs),
    }
}

/// Critical values of the normalized-bias statistic `n (rho - 1)` (PP Z(rho)).
pub fn rho(det: Deterministic, nobs: usize) -> Levels<f64> {
    match det {
        Deterministic::Constant => interpolate(&RHO_CONSTANT, nobs),
        Deterministic::ConstantTrend => interpolate(&RHO_TREND, nobs),
    }
}

/// Johansen trace critical values for a bivariate system, unrestricted
/// constant; index 0 is `H0: r = 0`, index 1 is `H0: r <= 1`.
pub const JOHANSEN_TRACE: [Levels<f64>; 2] = [
    Levels {
        p01: 19.93711,
        p05: 15.49471,
        p10: 13.42878,
    },
    Levels {
        p01: 6.634897,
        p05: 3.841466,
        p10: 2.705545,
    },
];
