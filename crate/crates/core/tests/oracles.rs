//! Estimators checked against independent computations: hand-rolled
//! Frisch-Waugh-Lovell regressions, brute-force scans and reference values
//! produced offline by statsmodels (`fixtures/reference.json`).

mod common;

use std::path::PathBuf;

use lfpc_core::econtests::{adf_test, johansen_trace, AdfLag, Deterministic};
use lfpc_core::ingest::parse_series_csv;
use lfpc_core::segfit::{fit_segment, PredictorKind, Regressor};
use lfpc_core::{AnnualSeries, CumulativeSeries, Unit, YearRange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::scan_beta;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load(name: &str) -> AnnualSeries {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    let (first, values) = parse_series_csv(&text, name, name).unwrap();
    AnnualSeries::new(name, Unit::Level, first, values).unwrap()
}

fn reference() -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(fixture("reference.json")).unwrap()).unwrap()
}

/// Residuals of `y` on the columns of `z` by normal equations and
/// Gauss-Jordan elimination.
fn residualize(y: &[f64], z: &[Vec<f64>]) -> Vec<f64> {
    let k = z[0].len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &yi) in z.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * yi;
        }
    }
    for c in 0..k {
        let p = (c..k)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != c {
                let f = a[r][c];
                let pivot = a[c].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot) {
                    *v -= f * pv;
                }
            }
        }
    }
    let b: Vec<f64> = (0..k).map(|i| a[i][k]).collect();
    z.iter()
        .zip(y)
        .map(|(row, yi)| yi - row.iter().zip(&b).map(|(x, c)| x * c).sum::<f64>())
        .collect()
}

/// ADF tau in two steps: partial the deterministic terms and lagged
/// differences out of both dx_t and x_{t-1}, then regress residual on
/// residual.
fn fwl_tau(x: &[f64], p: usize, trend: bool) -> f64 {
    let n = x.len();
    let dx: Vec<f64> = (1..n).map(|t| x[t] - x[t - 1]).collect();
    let ts: Vec<usize> = (p + 1..n).collect();
    let z: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| {
            let mut r = vec![1.0];
            if trend {
                r.push(t as f64);
            }
            r.extend((1..=p).map(|i| dx[t - 1 - i]));
            r
        })
        .collect();
    let y: Vec<f64> = ts.iter().map(|&t| dx[t - 1]).collect();
    let xl: Vec<f64> = ts.iter().map(|&t| x[t - 1]).collect();
    let ry = residualize(&y, &z);
    let rx = residualize(&xl, &z);
    let sxx: f64 = rx.iter().map(|v| v * v).sum();
    let g = rx.iter().zip(&ry).map(|(a, b)| a * b).sum::<f64>() / sxx;
    let ssr: f64 = ry.iter().zip(&rx).map(|(a, b)| (a - g * b).powi(2)).sum();
    let k = z[0].len() + 1;
    let s2 = ssr / (ts.len() - k) as f64;
    g / (s2 / sxx).sqrt()
}

#[test]
fn adf_matches_two_step_regression() {
    let x = load("ar05_20.csv");
    for p in 0..=2 {
        for (det, trend) in [
            (Deterministic::Constant, false),
            (Deterministic::ConstantTrend, true),
        ] {
            let r = adf_test(&x, AdfLag::Fixed(p), det).unwrap();
            let oracle = fwl_tau(x.values(), p, trend);
            let tau = r.value("tau").unwrap();
            assert!(
                (tau - oracle).abs() < 1e-8,
                "p={p} trend={trend}: {tau} vs {oracle}"
            );
        }
    }
}

#[test]
fn adf_matches_statsmodels() {
    let x = load("ar05_20.csv");
    let refs = reference();
    for p in 0..=2 {
        for (det, tag) in [
            (Deterministic::Constant, "c"),
            (Deterministic::ConstantTrend, "ct"),
        ] {
            let r = adf_test(&x, AdfLag::Fixed(p), det).unwrap();
            let want = &refs[format!("adf_p{p}_{tag}")];
            assert!((r.value("tau").unwrap() - want["tau"].as_f64().unwrap()).abs() < 1e-8);
            assert_eq!(r.n_obs as u64, want["nobs"].as_u64().unwrap());
        }
    }
}

#[test]
fn johansen_matches_statsmodels() {
    let a = CumulativeSeries::from_levels(load("pair_a.csv"));
    let b = CumulativeSeries::from_levels(load("pair_b.csv"));
    let refs = reference();
    for k in [1usize, 2] {
        let r = johansen_trace(&a, &b, k).unwrap();
        let want = &refs[format!("johansen_k{k}")];
        let trace: Vec<f64> = want["trace"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let eig: Vec<f64> = want["eig"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert!(
            (r.value("trace_r0").unwrap() - trace[0]).abs() < 1e-6,
            "k={k}"
        );
        assert!(
            (r.value("trace_r1").unwrap() - trace[1]).abs() < 1e-6,
            "k={k}"
        );
        for (got, want) in r.eigenvalues.iter().zip(&eig) {
            assert!((got - want).abs() < 1e-8);
        }
    }
}

#[test]
fn closed_form_matches_scan_on_seeded_segment() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 30usize;
    let x: Vec<f64> = (0..n)
        .map(|_| 0.005 + 0.01 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let obs: Vec<f64> = x
        .iter()
        .map(|l| 0.0484 + 3.846 * l + 0.002 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let xs = AnnualSeries::new("l", Unit::FractionPerYear, 1970, x.clone()).unwrap();
    let os = AnnualSeries::new("pi", Unit::FractionPerYear, 1970, obs.clone()).unwrap();
    let reg = Regressor {
        kind: PredictorKind::LabourForceChange,
        rates: &xs,
        lag: 0,
        fixed: None,
    };
    let seg = fit_segment(&os, &[reg], YearRange::new(1970, 1999), 0.7).unwrap();
    let beta = seg.beta.unwrap();
    assert!((beta - scan_beta(&obs, &x, 0.7)).abs() < 1e-4);
    let cum_end = 0.7 + obs.iter().sum::<f64>();
    let pred_end = 0.7 + beta * x.iter().sum::<f64>() + seg.alpha * n as f64;
    assert!((cum_end - pred_end).abs() < 1e-12);
}

#[test]
fn standard_errors_match_textbook_ols_formula() {
    // two-parameter formulas, residuals taken at the constrained-fit coefficients
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 25usize;
    let x: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * 0.01)
        .collect();
    let obs: Vec<f64> = x
        .iter()
        .map(|l| 0.02 + 2.0 * l + 0.001 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let xs = AnnualSeries::new("l", Unit::FractionPerYear, 1990, x.clone()).unwrap();
    let os = AnnualSeries::new("pi", Unit::FractionPerYear, 1990, obs.clone()).unwrap();
    let reg = Regressor {
        kind: PredictorKind::LabourForceChange,
        rates: &xs,
        lag: 0,
        fixed: None,
    };
    let seg = fit_segment(&os, &[reg], YearRange::new(1990, 2014), 0.0).unwrap();
    let (a, b) = (seg.alpha, seg.beta.unwrap());
    let ssr: f64 = obs
        .iter()
        .zip(&x)
        .map(|(y, l)| (y - a - b * l).powi(2))
        .sum();
    let s2 = ssr / (n - 2) as f64;
    let mean = x.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|l| (l - mean).powi(2)).sum();
    let se_b = (s2 / sxx).sqrt();
    let se_a = (s2 * (1.0 / n as f64 + mean * mean / sxx)).sqrt();
    assert!((seg.beta_se.unwrap() - se_b).abs() < 1e-10 * se_b.max(1.0));
    assert!((seg.alpha_se - se_a).abs() < 1e-10 * se_a.max(1.0));
}
