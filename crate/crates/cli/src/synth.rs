use std::fs;
use std::path::PathBuf;

use clap::Args;
use lfpc_core::ingest::{
    self, generate_synthetic, ManifestEntry, SynthModel, SynthSpec, TrueSegment, Variable,
};
use lfpc_core::{Unit, YearRange};
use serde::Serialize;

use crate::args::{parse_range, year_range};
use crate::config_err;
use crate::output;

/// Generate a seeded synthetic dataset: `lf.csv`, `pi.csv`, optionally
/// `u.csv`, plus `manifest.json` and the generator spec `synth_spec.json`.
#[derive(Args, Debug)]
pub struct Opts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator spec (JSON); overrides every other model flag except
    /// `--seed`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Years of the inflation series.
    #[arg(long, value_parser = parse_range, default_value = "1965..2012")]
    pub window: (i32, i32),
    #[arg(long = "break", default_value_t = 1986)]
    pub break_year: i32,
    #[arg(long, default_value_t = 2)]
    pub lag: i32,
    /// Standard deviation of the inflation noise.
    #[arg(long, default_value_t = 0.002)]
    pub noise: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    seed: u64,
    entries: &'a [ManifestEntry],
}

fn entry(id: &str, variable: Variable, unit: Unit) -> ManifestEntry {
    ManifestEntry {
        series_id: id.to_string(),
        path: Some(PathBuf::from(format!("{id}.csv"))),
        variable,
        source: "synthetic".into(),
        unit,
        sum_of: None,
    }
}

fn default_spec(o: &Opts) -> SynthSpec {
    let model = SynthModel {
        break_year: Some(o.break_year),
        lag: o.lag,
        inflation: vec![
            TrueSegment {
                alpha: 0.0484,
                beta: 3.846,
                gamma: 0.0,
            },
            TrueSegment {
                alpha: 0.0,
                beta: 2.383,
                gamma: 0.0,
            },
        ],
        unemployment: Vec::new(),
    };
    let mut spec = SynthSpec::new(o.seed, year_range(o.window), model);
    spec.obs_noise_sd = o.noise;
    spec
}

pub fn run(o: &Opts) -> anyhow::Result<()> {
    let spec = match &o.spec {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            let mut s: SynthSpec = serde_json::from_str(&text)
                .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            s.seed = o.seed;
            s
        }
        None => default_spec(o),
    };
    let d = generate_synthetic(&spec).map_err(|e| config_err(e.to_string()))?;
    let comment = vec![format!("synthetic, seed {}", d.seed)];
    let mut entries = vec![
        entry("lf", Variable::LabourForce, Unit::Level),
        entry("pi", Variable::Cpi, Unit::FractionPerYear),
    ];
    let mut files = vec![
        ("lf.csv", ingest::series_to_csv(&d.lf, &comment)),
        ("pi.csv", ingest::series_to_csv(&d.pi, &comment)),
    ];
    if let Some(u) = &d.u {
        entries.push(entry("u", Variable::Unemployment, Unit::FractionPerYear));
        files.push(("u.csv", ingest::series_to_csv(u, &comment)));
    }
    files.push((
        "manifest.json",
        output::to_json(&Manifest {
            seed: d.seed,
            entries: &entries,
        })?,
    ));
    files.push(("synth_spec.json", output::to_json(&spec)?));
    output::write_all(&o.out, &files)?;
    let years: YearRange = d.pi.range();
    eprintln!("wrote synthetic data for {years} (seed {})", d.seed);
    Ok(())
}
