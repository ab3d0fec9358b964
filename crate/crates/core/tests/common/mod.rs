#![allow(dead_code)]

use lfpc_core::ingest::{generate_synthetic, SynthModel, SynthSpec, SyntheticData, TrueSegment};
use lfpc_core::segfit::{
    BreakSearch, GammaMode, IntRange, PredictorKind, PredictorSearch, SearchSpec,
};
use lfpc_core::series::log_change;
use lfpc_core::{AnnualSeries, YearRange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const BETA: (f64, f64) = (3.846, 2.383);
pub const ALPHA: (f64, f64) = (0.0484, 0.0);

pub fn two_regimes(break_year: i32, lag: i32, alpha: (f64, f64), beta: (f64, f64)) -> SynthModel {
    SynthModel {
        break_year: Some(break_year),
        lag,
        inflation: vec![
            TrueSegment {
                alpha: alpha.0,
                beta: beta.0,
                gamma: 0.0,
            },
            TrueSegment {
                alpha: alpha.1,
                beta: beta.1,
                gamma: 0.0,
            },
        ],
        unemployment: Vec::new(),
    }
}

pub fn synth(seed: u64, lag: i32, noise: f64) -> SyntheticData {
    let mut spec = SynthSpec::new(
        seed,
        YearRange::new(1965, 2012),
        two_regimes(1986, lag, ALPHA, BETA),
    );
    spec.obs_noise_sd = noise;
    generate_synthetic(&spec).unwrap()
}

pub fn lf_rate(d: &SyntheticData) -> AnnualSeries {
    log_change(&d.lf).unwrap().renamed("l")
}

pub fn lf_search(lags: IntRange, breaks: BreakSearch, window: YearRange) -> SearchSpec {
    SearchSpec {
        target_id: "pi".into(),
        predictors: vec![PredictorSearch {
            series_id: "l".into(),
            kind: PredictorKind::LabourForceChange,
            lags,
        }],
        breaks,
        fit_window: window,
        excluded_interval: None,
        gamma: GammaMode::Free,
    }
}

/// SSE of the cumulative curve for slope `beta`, `alpha` set by the endpoint
/// constraint.
pub fn constrained_sse(obs: &[f64], x: &[f64], anchor: f64, beta: f64) -> f64 {
    let n = obs.len() as f64;
    let alpha = (obs.iter().sum::<f64>() - beta * x.iter().sum::<f64>()) / n;
    let (mut y, mut cx, mut sse) = (anchor, 0.0, 0.0);
    for (k, (o, xi)) in obs.iter().zip(x).enumerate() {
        y += o;
        cx += xi;
        sse += (y - (anchor + beta * cx + alpha * (k + 1) as f64)).powi(2);
    }
    sse
}

/// Minimizing slope on the grid `-20, -20 + 1e-4, ..., 20`.
pub fn scan_beta(obs: &[f64], x: &[f64], anchor: f64) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=400_000 {
        let beta = -20.0 + i as f64 * 1e-4;
        let sse = constrained_sse(obs, x, anchor, beta);
        if sse < best.0 {
            best = (sse, beta);
        }
    }
    best.1
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_walk(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    drifting_walk(rng, n, 0.0)
}

/// Random walk with unit-variance steps of mean `drift`.
pub fn drifting_walk(rng: &mut ChaCha8Rng, n: usize, drift: f64) -> Vec<f64> {
    let mut acc = 0.0;
    normals(rng, n)
        .into_iter()
        .map(|e| {
            acc += drift + e;
            acc
        })
        .collect()
}

pub fn ar1(rng: &mut ChaCha8Rng, phi: f64, n: usize) -> Vec<f64> {
    let e = normals(rng, n);
    let mut x = vec![e[0]; n];
    for t in 1..n {
        x[t] = phi * x[t - 1] + e[t];
    }
    x
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
