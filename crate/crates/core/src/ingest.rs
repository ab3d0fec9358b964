//! Reading annual series from disk and generating seeded synthetic data.
//!
//! Series files are CSV with a `year,value` header; lines starting with `#`
//! are comments. A JSON manifest maps series ids to files and declares each
//! file's unit. Percent files are divided by 100 on load.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segfit::MAX_LAG;
use crate::series::{AnnualSeries, SeriesError, Unit, YearRange};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("duplicate series id `{0}`")]
    DuplicateSeriesId(String),
    #[error("unknown unit `{unit}` for series `{series}`")]
    UnknownUnit { series: String, unit: String },
    #[error("series `{0}` is not in the manifest")]
    MissingSeries(String),
    #[error("series `{series}`: year {got} follows {after}")]
    NonConsecutiveYears {
        series: String,
        after: i32,
        got: i32,
    },
    #[error("series `{series}`: non-finite value at {year}")]
    NonFiniteValue { series: String, year: i32 },
    #[error("invalid manifest entry `{series}`: {message}")]
    BadEntry { series: String, message: String },
    #[error("invalid synthetic spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type Result<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Cpi,
    Dgdp,
    Unemployment,
    LabourForce,
    Population,
}

impl Variable {
    /// Whether a `level` file of this variable is turned into a rate by
    /// log-differencing before modelling.
    pub fn is_level_quantity(self) -> bool {
        !matches!(self, Variable::Unemployment)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub series_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub variable: Variable,
    pub source: String,
    pub unit: Unit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_of: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
struct RawEntry {
    series_id: String,
    #[serde(default)]
    path: Option<PathBuf>,
    variable: Variable,
    source: String,
    unit: String,
    #[serde(default)]
    sum_of: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
struct RawManifest {
    entries: Vec<RawEntry>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory that relative entry paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn parse_unit(series: &str, unit: &str) -> Result<Unit> {
    match unit {
        "percent" => Ok(Unit::Percent),
        "fraction-per-year" => Ok(Unit::FractionPerYear),
        "level" => Ok(Unit::Level),
        other => Err(IngestError::UnknownUnit {
            series: series.to_string(),
            unit: other.to_string(),
        }),
    }
}

impl DatasetManifest {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>, origin: &str) -> Result<Self> {
        let raw: RawManifest = serde_json::from_str(text).map_err(|e| IngestError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let mut seen = HashSet::new();
        let mut entries = Vec::with_capacity(raw.entries.len());
        for e in raw.entries {
            if !seen.insert(e.series_id.clone()) {
                return Err(IngestError::DuplicateSeriesId(e.series_id));
            }
            let unit = parse_unit(&e.series_id, &e.unit)?;
            let bad = |m: &str| IngestError::BadEntry {
                series: e.series_id.clone(),
                message: m.to_string(),
            };
            match (&e.path, &e.sum_of) {
                (Some(_), Some(_)) => return Err(bad("has both `path` and `sum_of`")),
                (None, None) => return Err(bad("needs `path` or `sum_of`")),
                (None, Some(parts)) if parts.is_empty() => return Err(bad("empty `sum_of`")),
                _ => {}
            }
            entries.push(ManifestEntry {
                series_id: e.series_id,
                path: e.path,
                variable: e.variable,
                source: e.source,
                unit,
                sum_of: e.sum_of,
            });
        }
        let ids: HashSet<&str> = entries.iter().map(|e| e.series_id.as_str()).collect();
        for e in &entries {
            for part in e.sum_of.iter().flatten() {
                if !ids.contains(part.as_str()) {
                    return Err(IngestError::MissingSeries(part.clone()));
                }
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn entry(&self, series_id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.series_id == series_id)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    DatasetManifest::from_json(&text, base, &path.display().to_string())
}

/// Parses `year,value` CSV text. Years must be consecutive.
pub fn parse_series_csv(text: &str, series_id: &str, origin: &str) -> Result<(i32, Vec<f64>)> {
    let parse_err = |m: String| IngestError::Parse {
        path: origin.to_string(),
        message: m,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "year" || &headers[1] != "value" {
        return Err(parse_err(format!(
            "expected header `year,value`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut first = None;
    let mut prev: Option<i32> = None;
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let year: i32 = rec[0]
            .parse()
            .map_err(|_| parse_err(format!("bad year `{}`", &rec[0])))?;
        let value: f64 = rec[1]
            .parse()
            .map_err(|_| parse_err(format!("bad value `{}` at {year}", &rec[1])))?;
        if let Some(p) = prev {
            if year != p + 1 {
                return Err(IngestError::NonConsecutiveYears {
                    series: series_id.to_string(),
                    after: p,
                    got: year,
                });
            }
        }
        if !value.is_finite() {
            return Err(IngestError::NonFiniteValue {
                series: series_id.to_string(),
                year,
            });
        }
        first.get_or_insert(year);
        prev = Some(year);
        values.push(value);
    }
    let first = first.ok_or_else(|| parse_err("no data rows".into()))?;
    Ok((first, values))
}

fn read_file_series(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    path: &Path,
) -> Result<AnnualSeries> {
    let full = manifest.resolve(path);
    let origin = full.display().to_string();
    let text = fs::read_to_string(&full).map_err(|e| IngestError::Io {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    let (first, values) = parse_series_csv(&text, &entry.series_id, &origin)?;
    normalize(AnnualSeries::new(
        entry.series_id.clone(),
        entry.unit,
        first,
        values,
    )?)
}

/// Percent becomes fraction-per-year; other units pass through unchanged.
pub fn normalize(series: AnnualSeries) -> Result<AnnualSeries> {
    match series.unit() {
        Unit::Percent => Ok(series.map(|v| v / 100.0)?.with_unit(Unit::FractionPerYear)),
        _ => Ok(series),
    }
}

/// Loads one series by id, unit-normalized and named after its id.
///
/// A `sum_of` entry is the year-by-year sum of its parts over the years all
/// parts cover; parts are summed after normalization and must share a unit.
pub fn load_series(manifest: &DatasetManifest, series_id: &str) -> Result<AnnualSeries> {
    let entry = manifest
        .entry(series_id)
        .ok_or_else(|| IngestError::MissingSeries(series_id.to_string()))?;
    match (&entry.path, &entry.sum_of) {
        (Some(path), _) => read_file_series(manifest, entry, path),
        (None, Some(parts)) => {
            let mut loaded = Vec::with_capacity(parts.len());
            for part in parts {
                let pe = manifest
                    .entry(part)
                    .ok_or_else(|| IngestError::MissingSeries(part.clone()))?;
                let path = pe.path.as_ref().ok_or_else(|| IngestError::BadEntry {
                    series: series_id.to_string(),
                    message: format!("part `{part}` is itself composite"),
                })?;
                loaded.push(read_file_series(manifest, pe, path)?);
            }
            let unit = loaded[0].unit();
            if loaded.iter().any(|s| s.unit() != unit) {
                return Err(IngestError::BadEntry {
                    series: series_id.to_string(),
                    message: "parts have different units".into(),
                });
            }
            let common = loaded
                .iter()
                .skip(1)
                .try_fold(loaded[0].range(), |r, s| r.intersect(&s.range()))
                .ok_or_else(|| IngestError::BadEntry {
                    series: series_id.to_string(),
                    message: "parts share no years".into(),
                })?;
            let values = common
                .years()
                .map(|y| loaded.iter().map(|s| s.get(y).expect("common year")).sum())
                .collect();
            Ok(AnnualSeries::new(series_id, unit, common.start, values)?)
        }
        (None, None) => unreachable!("validated at load"),
    }
}

pub fn series_to_csv(series: &AnnualSeries, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("year,value\n");
    for (year, v) in series.iter() {
        out.push_str(&format!("{year},{v}\n"));
    }
    out
}

/// Writes a series as CSV with full-precision values.
pub fn save_series(series: &AnnualSeries, path: &Path, comments: &[String]) -> Result<()> {
    let io = |e: std::io::Error| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(series_to_csv(series, comments).as_bytes())
        .map_err(io)
}

/// True coefficients of one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueSegment {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
}

/// Generating model: one regime without a break, two with one. Regime 1
/// covers years up to and including the break.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthModel {
    pub break_year: Option<i32>,
    /// Lag of inflation behind labour-force change.
    pub lag: i32,
    pub inflation: Vec<TrueSegment>,
    /// Unemployment regimes driven by contemporaneous labour-force change;
    /// leave empty for no unemployment series.
    #[serde(default)]
    pub unemployment: Vec<TrueSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    /// Years covered by the inflation and unemployment series.
    pub years: YearRange,
    pub lf_drift: f64,
    pub lf_noise_sd: f64,
    pub model: SynthModel,
    pub obs_noise_sd: f64,
    /// Noise on unemployment; defaults to `obs_noise_sd`.
    #[serde(default)]
    pub unemployment_noise_sd: Option<f64>,
    /// Measurement noise added to log labour-force levels after simulation.
    #[serde(default)]
    pub lf_measurement_sd: f64,
    #[serde(default = "default_lf_level")]
    pub lf_start_level: f64,
}

fn default_lf_level() -> f64 {
    3000.0
}

impl SynthSpec {
    pub fn new(seed: u64, years: YearRange, model: SynthModel) -> Self {
        Self {
            seed,
            years,
            lf_drift: 0.01,
            lf_noise_sd: 0.02,
            model,
            obs_noise_sd: 0.002,
            unemployment_noise_sd: None,
            lf_measurement_sd: 0.0,
            lf_start_level: default_lf_level(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(IngestError::BadSpec(m));
        if self.years.start >= self.years.end {
            return bad(format!("years {} need start < end", self.years));
        }
        let sds = [
            self.lf_noise_sd,
            self.obs_noise_sd,
            self.lf_measurement_sd,
            self.unemployment_noise_sd.unwrap_or(0.0),
        ];
        if sds.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return bad("noise standard deviations must be finite and >= 0".into());
        }
        if !self.lf_drift.is_finite() || self.lf_start_level.is_nan() || self.lf_start_level <= 0.0
        {
            return bad("lf_drift must be finite and lf_start_level positive".into());
        }
        let m = &self.model;
        if m.lag < 0 || m.lag > MAX_LAG {
            return bad(format!("lag {} outside [0, {MAX_LAG}]", m.lag));
        }
        let regimes = if let Some(b) = m.break_year {
            if b <= self.years.start || b >= self.years.end {
                return bad(format!("break {b} not inside {}", self.years));
            }
            2
        } else {
            1
        };
        if m.inflation.len() != regimes {
            return bad(format!(
                "{} inflation regimes for {regimes} segments",
                m.inflation.len()
            ));
        }
        if !m.unemployment.is_empty() && m.unemployment.len() != regimes {
            return bad(format!(
                "{} unemployment regimes for {regimes} segments",
                m.unemployment.len()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub seed: u64,
    /// Measured labour-force level, starting `MAX_LAG + 1` years before
    /// `years.start` so every admissible lag is covered.
    pub lf: AnnualSeries,
    /// Labour-force change before measurement noise.
    pub true_lf_change: AnnualSeries,
    pub pi: AnnualSeries,
    pub u: Option<AnnualSeries>,
}

/// Simulates labour force, unemployment and inflation.
///
/// The generator is ChaCha8 seeded with `seed` via `seed_from_u64`, drawing
/// standard normals in a fixed order: labour-force innovations, measurement
/// noise, unemployment noise, inflation noise. Each stream is drawn in full
/// even when its standard deviation is zero, so the streams stay aligned
/// across specs that differ only in noise levels.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw =
        |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };

    let lf_first = spec.years.start - MAX_LAG - 1;
    let n_lf = (spec.years.end - lf_first + 1) as usize;
    let n = spec.years.len();

    let innov = draw(n_lf - 1);
    let mut log_lf = Vec::with_capacity(n_lf);
    log_lf.push(spec.lf_start_level.ln());
    for z in &innov {
        let last = *log_lf.last().expect("non-empty");
        log_lf.push(last + spec.lf_drift + spec.lf_noise_sd * z);
    }
    let true_l: Vec<f64> = log_lf.windows(2).map(|w| w[1] - w[0]).collect();
    let true_l = AnnualSeries::new(
        "lf_true_change",
        Unit::FractionPerYear,
        lf_first + 1,
        true_l,
    )?;

    let meas = draw(n_lf);
    let lf_obs: Vec<f64> = log_lf
        .iter()
        .zip(&meas)
        .map(|(x, e)| (x + spec.lf_measurement_sd * e).exp())
        .collect();

    let m = &spec.model;
    let regime = |year: i32| match m.break_year {
        Some(b) if year > b => 1,
        _ => 0,
    };

    let u_noise = draw(n);
    let u_sd = spec.unemployment_noise_sd.unwrap_or(spec.obs_noise_sd);
    let u: Option<Vec<f64>> = (!m.unemployment.is_empty()).then(|| {
        spec.years
            .years()
            .zip(&u_noise)
            .map(|(year, e)| {
                let seg = m.unemployment[regime(year)];
                seg.alpha + seg.beta * true_l.get(year).expect("covered") + u_sd * e
            })
            .collect()
    });

    let pi_noise = draw(n);
    let pi: Vec<f64> = spec
        .years
        .years()
        .enumerate()
        .map(|(k, year)| {
            let seg = m.inflation[regime(year)];
            let u_term = u.as_ref().map_or(0.0, |u| seg.gamma * u[k]);
            seg.alpha
                + seg.beta * true_l.get(year - m.lag).expect("covered")
                + u_term
                + spec.obs_noise_sd * pi_noise[k]
        })
        .collect();

    Ok(SyntheticData {
        seed: spec.seed,
        lf: AnnualSeries::new("lf", Unit::Level, lf_first, lf_obs)?,
        true_lf_change: true_l,
        pi: AnnualSeries::new("pi", Unit::FractionPerYear, spec.years.start, pi)?,
        u: u.map(|v| AnnualSeries::new("u", Unit::FractionPerYear, spec.years.start, v))
            .transpose()?,
    })
}

/// Loads every series of a manifest keyed by id.
pub fn load_all(manifest: &DatasetManifest) -> Result<HashMap<String, AnnualSeries>> {
    manifest
        .entries
        .iter()
        .map(|e| Ok((e.series_id.clone(), load_series(manifest, &e.series_id)?)))
        .collect()
}
