use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use lfpc_core::forecast::{self, ForecastComparison};
use lfpc_core::ingest::SynthSpec;
use lfpc_core::segfit::{
    self, FitResult, GridCell, ModelSpec, PredictorKind, SearchSpec, SegmentCoefficients,
};
use lfpc_core::AnnualSeries;
use serde::Serialize;

use crate::args::{parse_range, year_range, ModelArgs};
use crate::config_err;
use crate::data::Dataset;
use crate::output;

/// Fit the segmented cumulative model and write `fit_report.json` and
/// `curves.csv`.
#[derive(Args, Debug)]
pub struct Opts {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Year whose preceding cumulative is zero in `curves.csv`; no later
    /// than the window start.
    #[arg(long)]
    pub base_year: Option<i32>,
    /// Horizon of the no-change benchmark; defaults to the model lag, at
    /// least 1.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Also refit on the window up to this year and forecast `--eval`.
    #[arg(long, requires = "eval")]
    pub train_end: Option<i32>,
    /// Out-of-sample evaluation years.
    #[arg(long, value_parser = parse_range, requires = "train_end")]
    pub eval: Option<(i32, i32)>,
    /// Generator spec of synthetic input; the report then compares the
    /// estimates with the true coefficients.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Relative tolerance for `--truth` slope checks.
    #[arg(long, default_value_t = 0.05)]
    pub truth_tolerance: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Statistics {
    n_eval: usize,
    rmse_annual: f64,
    rmse_cumulative: f64,
    r2_annual: f64,
    r2_cumulative: f64,
    sse_cumulative: f64,
    free_term_c: f64,
}

#[derive(Serialize)]
struct SegmentCheck {
    beta_true: f64,
    beta: f64,
    beta_rel_error: f64,
    alpha_true: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct TruthCheck {
    tolerance: f64,
    break_true: Option<i32>,
    break_found: Option<i32>,
    lag_true: i32,
    lag_found: Option<i32>,
    segments: Vec<SegmentCheck>,
    pass: bool,
}

#[derive(Serialize)]
struct FitReport<'a> {
    target: &'a str,
    search: &'a SearchSpec,
    spec: &'a ModelSpec,
    base_year: i32,
    segments: &'a [SegmentCoefficients],
    statistics: Statistics,
    boundary_gaps: Vec<(i32, f64)>,
    in_gap: &'a [i32],
    benchmark: ForecastComparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_of_sample: Option<ForecastComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth_check: Option<TruthCheck>,
    grid: &'a [GridCell],
}

pub fn fit_from_args(
    model: &ModelArgs,
) -> anyhow::Result<(
    Dataset,
    SearchSpec,
    AnnualSeries,
    Vec<AnnualSeries>,
    FitResult,
)> {
    let data = Dataset::open(&model.manifest.manifest)?;
    let search = model.search_spec(&data)?;
    let target = data.rate(&model.target)?;
    let preds = model
        .predictors
        .iter()
        .map(|id| data.rate(id))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let refs: Vec<&AnnualSeries> = preds.iter().collect();
    let fit = segfit::fit_model(&search, &target, &refs).context("fitting")?;
    Ok((data, search, target, preds, fit))
}

fn truth_check(fit: &FitResult, truth: &SynthSpec, tolerance: f64) -> TruthCheck {
    let segments: Vec<SegmentCheck> = fit
        .segments
        .iter()
        .zip(&truth.model.inflation)
        .map(|(s, t)| {
            let beta = s.slope(PredictorKind::LabourForceChange);
            SegmentCheck {
                beta_true: t.beta,
                beta,
                beta_rel_error: (beta - t.beta).abs() / t.beta.abs(),
                alpha_true: t.alpha,
                alpha: s.alpha,
            }
        })
        .collect();
    let lag_found = fit.lag_of(PredictorKind::LabourForceChange);
    let pass = fit.spec.break_year == truth.model.break_year
        && lag_found == Some(truth.model.lag)
        && segments.len() == truth.model.inflation.len()
        && segments.iter().all(|s| s.beta_rel_error <= tolerance);
    TruthCheck {
        tolerance,
        break_true: truth.model.break_year,
        break_found: fit.spec.break_year,
        lag_true: truth.model.lag,
        lag_found,
        segments,
        pass,
    }
}

/// `curves.csv`: cumulatives start from zero before `base_year`.
pub fn curves_csv(
    fit: &FitResult,
    target: &AnnualSeries,
    base_year: i32,
) -> anyhow::Result<String> {
    let start = fit.spec.fit_window.start;
    let offset: f64 = (base_year..start)
        .map(|y| {
            target.get(y).ok_or_else(|| {
                config_err(format!(
                    "target has no value for {y} (base year {base_year})"
                ))
            })
        })
        .sum::<anyhow::Result<f64>>()?;
    let mut out = String::from(
        "year,observed_rate,predicted_rate,observed_cumulative,predicted_cumulative,residual,excluded\n",
    );
    for (year, obs) in fit.observed_annual.iter() {
        let pred = fit.predicted_annual.get(year).expect("same range");
        let oc = fit.observed_cumulative.get(year).expect("same range") + offset;
        let pc = fit.predicted_cumulative.get(year).expect("same range") + offset;
        let res = fit.residual_annual.get(year).expect("same range");
        let excluded = u8::from(fit.in_gap.contains(&year));
        out.push_str(&format!("{year},{obs},{pred},{oc},{pc},{res},{excluded}\n"));
    }
    Ok(out)
}

pub fn run(o: &Opts) -> anyhow::Result<()> {
    let truth: Option<SynthSpec> = match &o.truth {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?,
            )
        }
        None => None,
    };
    let (_, search, target, preds, fit) = fit_from_args(&o.model)?;
    let base_year = o.base_year.unwrap_or(fit.spec.fit_window.start);
    if base_year > fit.spec.fit_window.start {
        return Err(config_err(format!(
            "base year {base_year} is after the window start {}",
            fit.spec.fit_window.start
        )));
    }
    let benchmark = match o.horizon {
        Some(h) => forecast::in_sample_comparison_at(&fit, h),
        None => forecast::in_sample_comparison(&fit),
    }
    .context("benchmark")?;
    let out_of_sample = match (o.train_end, o.eval) {
        (Some(train_end), Some(eval)) => {
            let refs: Vec<&AnnualSeries> = preds.iter().collect();
            let (cmp, _) =
                forecast::oos_evaluate(&search, &target, &refs, train_end, year_range(eval))
                    .context("out-of-sample evaluation")?;
            Some(cmp)
        }
        _ => None,
    };
    let report = FitReport {
        target: &fit.spec.target_id,
        search: &search,
        spec: &fit.spec,
        base_year,
        segments: &fit.segments,
        statistics: Statistics {
            n_eval: fit.n_eval,
            rmse_annual: fit.rmse_annual,
            rmse_cumulative: fit.rmse_cumulative,
            r2_annual: fit.r2_annual,
            r2_cumulative: fit.r2_cumulative,
            sse_cumulative: fit.sse_cumulative,
            free_term_c: fit.free_term_c,
        },
        boundary_gaps: fit.boundary_gaps(),
        in_gap: &fit.in_gap,
        benchmark,
        out_of_sample,
        truth_check: truth
            .as_ref()
            .map(|t| truth_check(&fit, t, o.truth_tolerance)),
        grid: &fit.grid,
    };
    let files = [
        ("fit_report.json", output::to_json(&report)?),
        ("curves.csv", curves_csv(&fit, &target, base_year)?),
    ];
    output::write_all(&o.out, &files)?;

    for (i, s) in fit.segments.iter().enumerate() {
        eprintln!(
            "segment {} {}: alpha {:.4} beta {:.4} gamma {}",
            i + 1,
            s.window,
            s.alpha,
            s.slope(PredictorKind::LabourForceChange),
            s.gamma.map_or("-".to_string(), |g| format!("{g:.4}"))
        );
    }
    eprintln!(
        "break {:?}, lags {:?}, rmse {:.4} (naive {:.4} at h={})",
        fit.spec.break_year,
        fit.spec
            .predictors
            .iter()
            .map(|p| p.lag)
            .collect::<Vec<_>>(),
        fit.rmse_annual,
        report.benchmark.naive_rmsfe,
        report.benchmark.horizon
    );
    Ok(())
}
