//! Year-indexed annual series and the transformations shared by every other
//! module.
//!
//! An [`AnnualSeries`] always covers a run of consecutive years with finite
//! values. Gapped input has to be split before it gets here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series `{0}` is empty")]
    Empty(String),
    #[error("series `{name}` has a non-finite value at {year}")]
    NonFiniteValue { name: String, year: i32 },
    #[error("series `{name}` has a non-positive level {value} at {year}")]
    NonPositiveLevel { name: String, year: i32, value: f64 },
    #[error("series `{name}` needs at least {needed} values, has {len}")]
    TooShort {
        name: String,
        len: usize,
        needed: usize,
    },
    #[error("year {year} is outside {first}..={last}")]
    YearOutOfRange { year: i32, first: i32, last: i32 },
    #[error("moving-average window {window} is invalid for length {len} (must be odd, 1..=len)")]
    BadWindow { window: usize, len: usize },
    #[error("overlap of {overlap} years is too short (need at least 3)")]
    InsufficientOverlap { overlap: usize },
    #[error("series has zero variance on the comparison window")]
    ZeroVariance,
}

/// Measurement unit attached to a series.
///
/// `Percent` only exists at ingestion; loaders divide by 100 and relabel as
/// `FractionPerYear`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    FractionPerYear,
    Level,
    Percent,
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        if self.end < self.start {
            0
        } else {
            (self.end - self.start + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }

    pub fn intersect(&self, other: &YearRange) -> Option<YearRange> {
        let r = YearRange::new(self.start.max(other.start), self.end.min(other.end));
        (!r.is_empty()).then_some(r)
    }
}

impl std::fmt::Display for YearRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    name: String,
    unit: Unit,
    first_year: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    pub fn new(
        name: impl Into<String>,
        unit: Unit,
        first_year: i32,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let name = name.into();
        if values.is_empty() {
            return Err(SeriesError::Empty(name));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFiniteValue {
                name,
                year: first_year + i as i32,
            });
        }
        Ok(Self {
            name,
            unit,
            first_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.first_year + self.values.len() as i32 - 1
    }

    pub fn range(&self) -> YearRange {
        YearRange::new(self.first_year, self.last_year())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        if year < self.first_year {
            return None;
        }
        self.values.get((year - self.first_year) as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.first_year + i as i32, v))
    }

    /// Values for every year in `range`, or `None` if any year is missing.
    pub fn window(&self, range: YearRange) -> Option<&[f64]> {
        let r = self.range();
        if range.is_empty() || !r.contains(range.start) || !r.contains(range.end) {
            return None;
        }
        let lo = (range.start - self.first_year) as usize;
        Some(&self.values[lo..lo + range.len()])
    }

    pub fn slice(&self, range: YearRange) -> Result<AnnualSeries, SeriesError> {
        let vals = self.window(range).ok_or(SeriesError::YearOutOfRange {
            year: if self.range().contains(range.start) {
                range.end
            } else {
                range.start
            },
            first: self.first_year,
            last: self.last_year(),
        })?;
        AnnualSeries::new(self.name.clone(), self.unit, range.start, vals.to_vec())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    /// Element-wise map keeping years and unit.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<AnnualSeries, SeriesError> {
        AnnualSeries::new(
            self.name.clone(),
            self.unit,
            self.first_year,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Running sum of a rate series from `base_year`; conceptually zero at
/// `base_year - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeSeries {
    base_year: i32,
    series: AnnualSeries,
}

impl CumulativeSeries {
    /// Wraps an already-accumulated level series, e.g. a predicted cumulative
    /// curve read back from disk.
    pub fn from_levels(series: AnnualSeries) -> Self {
        Self {
            base_year: series.first_year(),
            series: series.with_unit(Unit::Level),
        }
    }

    pub fn base_year(&self) -> i32 {
        self.base_year
    }

    pub fn series(&self) -> &AnnualSeries {
        &self.series
    }

    pub fn into_series(self) -> AnnualSeries {
        self.series
    }

    pub fn values(&self) -> &[f64] {
        self.series.values()
    }

    pub fn range(&self) -> YearRange {
        self.series.range()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.series.get(year)
    }
}

/// Backward log-difference `ln x(t) - ln x(t-1)`.
pub fn log_change(x: &AnnualSeries) -> Result<AnnualSeries, SeriesError> {
    if x.len() < 2 {
        return Err(SeriesError::TooShort {
            name: x.name.clone(),
            len: x.len(),
            needed: 2,
        });
    }
    if let Some((year, value)) = x.iter().find(|&(_, v)| v <= 0.0) {
        return Err(SeriesError::NonPositiveLevel {
            name: x.name.clone(),
            year,
            value,
        });
    }
    let out = x.values.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    AnnualSeries::new(x.name.clone(), Unit::FractionPerYear, x.first_year + 1, out)
}

pub fn cumulative(r: &AnnualSeries, base_year: i32) -> Result<CumulativeSeries, SeriesError> {
    if !r.range().contains(base_year) {
        return Err(SeriesError::YearOutOfRange {
            year: base_year,
            first: r.first_year,
            last: r.last_year(),
        });
    }
    let lo = (base_year - r.first_year) as usize;
    let mut acc = 0.0;
    let values = r.values[lo..]
        .iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect();
    Ok(CumulativeSeries {
        base_year,
        series: AnnualSeries::new(r.name.clone(), Unit::Level, base_year, values)?,
    })
}

/// Centered moving average; the output loses `(window - 1) / 2` years at each
/// end instead of padding.
pub fn moving_average(x: &AnnualSeries, window: usize) -> Result<AnnualSeries, SeriesError> {
    if window == 0 || window.is_multiple_of(2) || window > x.len() {
        return Err(SeriesError::BadWindow {
            window,
            len: x.len(),
        });
    }
    let half = (window - 1) / 2;
    let out = x
        .values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    AnnualSeries::new(x.name.clone(), x.unit, x.first_year + half as i32, out)
}

/// `out(t) = x(t - lag)`.
pub fn shift(x: &AnnualSeries, lag: i32) -> AnnualSeries {
    AnnualSeries {
        first_year: x.first_year + lag,
        ..x.clone()
    }
}

/// Pearson correlation of `a(t)` with `b(t - lag)` on the common years.
pub fn pearson_r(a: &AnnualSeries, b: &AnnualSeries, lag: i32) -> Result<f64, SeriesError> {
    let b = shift(b, lag);
    let overlap = a
        .range()
        .intersect(&b.range())
        .ok_or(SeriesError::InsufficientOverlap { overlap: 0 })?;
    if overlap.len() < 3 {
        return Err(SeriesError::InsufficientOverlap {
            overlap: overlap.len(),
        });
    }
    let xa = a.window(overlap).expect("overlap inside a");
    let xb = b.window(overlap).expect("overlap inside b");
    let n = overlap.len() as f64;
    let ma = xa.iter().sum::<f64>() / n;
    let mb = xb.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&p, &q) in xa.iter().zip(xb) {
        let (dp, dq) = (p - ma, q - mb);
        sab += dp * dq;
        saa += dp * dp;
        sbb += dq * dq;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(SeriesError::ZeroVariance);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Removes a level step of `step_amount` that first appears at `step_year`,
/// spreading it as a linear ramp over `[first_year, step_year]`.
///
/// The step is subtracted from `step_year` onwards and added back as a ramp
/// of `step_amount * k / m` at the `k`-th year after `first_year`, with
/// `m = step_year - first_year`. The ramp reaches the full amount at
/// `step_year`, so values from there on come out unchanged and only the
/// earlier years move. The first and last values are preserved.
pub fn redistribute_step(
    x: &AnnualSeries,
    step_year: i32,
    step_amount: f64,
) -> Result<AnnualSeries, SeriesError> {
    if step_year <= x.first_year || step_year >= x.last_year() {
        return Err(SeriesError::YearOutOfRange {
            year: step_year,
            first: x.first_year,
            last: x.last_year(),
        });
    }
    let m = (step_year - x.first_year) as f64;
    let out = x
        .iter()
        .map(|(year, v)| {
            if year >= step_year {
                v
            } else {
                let k = (year - x.first_year) as f64;
                v + step_amount * k / m
            }
        })
        .collect();
    AnnualSeries::new(x.name.clone(), x.unit, x.first_year, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn s(first: i32, v: &[f64]) -> AnnualSeries {
        AnnualSeries::new("x", Unit::Level, first, v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            AnnualSeries::new("e", Unit::Level, 1960, vec![]),
            Err(SeriesError::Empty(_))
        ));
        assert_eq!(
            AnnualSeries::new("n", Unit::Level, 1960, vec![1.0, f64::NAN]),
            Err(SeriesError::NonFiniteValue {
                name: "n".into(),
                year: 1961
            })
        );
    }

    #[test]
    fn log_change_examples() {
        let c = log_change(&s(1960, &[100.0, 100.0, 100.0])).unwrap();
        assert_eq!(c.values(), &[0.0, 0.0]);
        assert_eq!(c.first_year(), 1961);
        assert_eq!(c.unit(), Unit::FractionPerYear);

        let d = log_change(&s(1960, &[100.0, 200.0])).unwrap();
        assert_relative_eq!(d.values()[0], std::f64::consts::LN_2, epsilon = 1e-12);

        let lf = log_change(&s(1960, &[3500.0, 3535.0, 3570.35])).unwrap();
        for v in lf.values() {
            assert_relative_eq!(*v, 1.01f64.ln(), epsilon = 1e-12);
            assert_relative_eq!(*v, 0.00995, epsilon = 1e-5);
        }
    }

    #[test]
    fn log_change_errors() {
        assert!(matches!(
            log_change(&s(1960, &[1.0])),
            Err(SeriesError::TooShort { .. })
        ));
        assert!(matches!(
            log_change(&s(1960, &[1.0, 0.0, 2.0])),
            Err(SeriesError::NonPositiveLevel { year: 1961, .. })
        ));
    }

    #[test]
    fn cumulative_examples() {
        let r = AnnualSeries::new("r", Unit::FractionPerYear, 1965, vec![0.1, 0.2, -0.1]).unwrap();
        let c = cumulative(&r, 1965).unwrap();
        assert_relative_eq!(c.values()[0], 0.1);
        assert_relative_eq!(c.values()[1], 0.3, epsilon = 1e-15);
        assert_relative_eq!(c.values()[2], 0.2, epsilon = 1e-15);
        assert_eq!(c.base_year(), 1965);

        let z = AnnualSeries::new("z", Unit::FractionPerYear, 1965, vec![0.0; 4]).unwrap();
        assert!(cumulative(&z, 1966)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));

        assert!(matches!(
            cumulative(&r, 1964),
            Err(SeriesError::YearOutOfRange { .. })
        ));
    }

    #[test]
    fn moving_average_examples() {
        let x = s(2000, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(moving_average(&x, 1).unwrap(), x);
        let m = moving_average(&x, 3).unwrap();
        assert_eq!(m.values(), &[2.0, 3.0, 4.0]);
        assert_eq!(m.first_year(), 2001);

        let c = moving_average(&s(2000, &[7.0; 6]), 3).unwrap();
        assert_eq!(c.values(), &[7.0; 4]);

        for w in [0, 2, 7] {
            assert!(matches!(
                moving_average(&x, w),
                Err(SeriesError::BadWindow { .. })
            ));
        }
    }

    #[test]
    fn pearson_examples() {
        let a = s(1960, &[1.0, 3.0, 2.0, 5.0, 4.0]);
        let neg = a.map(|v| -v).unwrap();
        assert_relative_eq!(pearson_r(&a, &a, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(pearson_r(&a, &neg, 0).unwrap(), -1.0, epsilon = 1e-15);

        // lagging a copy of `a` by 2 years and shifting back recovers r = 1
        let later = shift(&a, 2);
        assert_relative_eq!(pearson_r(&later, &a, 2).unwrap(), 1.0, epsilon = 1e-15);

        assert!(matches!(
            pearson_r(&a, &a, 3),
            Err(SeriesError::InsufficientOverlap { overlap: 2 })
        ));
        assert_eq!(
            pearson_r(&a, &s(1960, &[2.0; 5]), 0),
            Err(SeriesError::ZeroVariance)
        );
    }

    #[test]
    fn shift_examples() {
        let x = s(1960, &[1.0, 2.0]);
        assert_eq!(shift(&x, 0), x);
        let y = shift(&x, 2);
        assert_eq!(y.first_year(), 1962);
        assert_eq!(y.values(), x.values());
        assert_eq!(shift(&shift(&x, 3), -3), x);
    }

    #[test]
    fn redistribute_step_examples() {
        let x = s(2000, &[10.0, 10.0, 10.0, 15.0, 15.0]);
        assert_eq!(redistribute_step(&x, 2002, 0.0).unwrap(), x);

        let r = redistribute_step(&x, 2003, 5.0).unwrap();
        let v = r.values();
        assert_eq!(v[0], 10.0);
        assert_eq!(*v.last().unwrap(), 15.0);
        // linear increments of 5/3 up to the step year, flat afterwards
        let inc: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
        for d in &inc[..3] {
            assert_relative_eq!(*d, 5.0 / 3.0, epsilon = 1e-12);
        }
        assert_eq!(inc[3], 0.0);

        assert!(matches!(
            redistribute_step(&x, 2000, 1.0),
            Err(SeriesError::YearOutOfRange { .. })
        ));
        assert!(matches!(
            redistribute_step(&x, 2004, 1.0),
            Err(SeriesError::YearOutOfRange { .. })
        ));
    }

    fn positive_levels() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.5f64..5000.0, 2..40)
    }

    proptest! {
        #[test]
        fn cumulative_log_change_telescopes(levels in positive_levels(), off in 0usize..10) {
            let x = s(1950, &levels);
            let l = log_change(&x).unwrap();
            let base = l.first_year() + (off % l.len()) as i32;
            let c = cumulative(&l, base).unwrap();
            let anchor = x.get(base - 1).unwrap().ln();
            for (year, v) in c.series().iter() {
                let expected = x.get(year).unwrap().ln() - anchor;
                prop_assert!((v - expected).abs() <= 1e-12, "{year}: {v} vs {expected}");
            }
        }

        #[test]
        fn shift_round_trips(v in prop::collection::vec(-1e3f64..1e3, 1..20), k in -50i32..50) {
            let x = s(1990, &v);
            prop_assert_eq!(shift(&shift(&x, k), -k), x);
        }

        #[test]
        fn moving_average_keeps_constants(c in -1e6f64..1e6, len in 1usize..30, half in 0usize..5) {
            let w = 2 * half + 1;
            prop_assume!(w <= len);
            let m = moving_average(&s(1990, &vec![c; len]), w).unwrap();
            for v in m.values() {
                prop_assert!((v - c).abs() <= c.abs() * 1e-15);
            }
        }

        #[test]
        fn pearson_is_symmetric(pairs in prop::collection::vec((-10f64..10.0, -10f64..10.0), 3..30)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (a, b) = (s(1970, &a), s(1970, &b));
            if let (Ok(ab), Ok(ba)) = (pearson_r(&a, &b, 0), pearson_r(&b, &a, 0)) {
                prop_assert!((ab - ba).abs() <= 1e-12);
            }
        }

        #[test]
        fn redistribute_keeps_endpoints(levels in positive_levels(), amount in -100f64..100.0, at in 0usize..40) {
            prop_assume!(levels.len() >= 3);
            let x = s(1980, &levels);
            let step = x.first_year() + 1 + (at % (levels.len() - 2)) as i32;
            let r = redistribute_step(&x, step, amount).unwrap();
            prop_assert_eq!(r.values()[0], x.values()[0]);
            prop_assert_eq!(r.values().last(), x.values().last());
        }
    }
}
