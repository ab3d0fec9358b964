use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use lfpc_core::forecast::{self, ForecastResult, LabourForceInput};
use lfpc_core::ingest::Variable;
use lfpc_core::{AnnualSeries, Unit, YearRange};
use serde::Serialize;

use crate::args::ModelArgs;
use crate::config_err;
use crate::fit::fit_from_args;
use crate::output;

/// Fit a model, then predict from measured predictors or project from a
/// labour-force projection. Writes `projection.csv` and `deflation.json`.
#[derive(Args, Debug)]
pub struct Opts {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Labour-force projection series id (level or rate). Without it the
    /// model runs on the measured predictors.
    #[arg(long)]
    pub projection: Option<String>,
    /// Last projected year; defaults to the last year the projection reaches.
    #[arg(long)]
    pub through: Option<i32>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Deflation<'a> {
    model_ref: &'a str,
    horizon: i32,
    first_year: i32,
    last_year: i32,
    intervals: &'a [YearRange],
}

fn projection_csv(f: &ForecastResult) -> String {
    let mut out = String::from("year,predicted_rate,in_gap\n");
    for (year, v) in f.predicted.iter() {
        let gap = u8::from(f.in_gap.contains(&year));
        out.push_str(&format!("{year},{v},{gap}\n"));
    }
    out
}

pub fn run(o: &Opts) -> anyhow::Result<()> {
    let (data, _, _, preds, fit) = fit_from_args(&o.model)?;
    let result = match &o.projection {
        None => {
            let refs: Vec<&AnnualSeries> = preds.iter().collect();
            let mut f = forecast::predict(&fit, &refs).context("prediction")?;
            if let Some(t) = o.through {
                let r = YearRange::new(f.predicted.first_year(), t.min(f.predicted.last_year()));
                f.predicted = f
                    .predicted
                    .slice(r)
                    .map_err(|e| config_err(format!("--through {t}: {e}")))?;
                f.in_gap.retain(|y| *y <= t);
                f.deflation_intervals = forecast::deflation_intervals(&f.predicted);
            }
            f
        }
        Some(id) => {
            if !matches!(
                data.variable(id)?,
                Variable::LabourForce | Variable::Population
            ) {
                return Err(config_err(format!(
                    "projection `{id}` is not a labour-force series"
                )));
            }
            let proj = data.raw(id)?;
            let lag = fit.spec.predictors.first().map_or(0, |p| p.lag);
            let history;
            let input = if proj.unit() == Unit::Level {
                history = data.raw(&fit.spec.predictors[0].series_id).ok();
                LabourForceInput::Level {
                    projection: &proj,
                    history: history.as_ref().filter(|h| h.unit() == Unit::Level),
                }
            } else {
                LabourForceInput::Rate(&proj)
            };
            let through = o.through.unwrap_or(proj.last_year() + lag);
            forecast::project(&fit, input, through).context("projection")?
        }
    };
    let deflation = Deflation {
        model_ref: &result.model_ref,
        horizon: result.horizon,
        first_year: result.predicted.first_year(),
        last_year: result.predicted.last_year(),
        intervals: &result.deflation_intervals,
    };
    for r in &result.deflation_intervals {
        eprintln!("predicted deflation {r}");
    }
    output::write_all(
        &o.out,
        &[
            ("projection.csv", projection_csv(&result)),
            ("deflation.json", output::to_json(&deflation)?),
        ],
    )
}
