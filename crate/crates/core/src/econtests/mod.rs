//! Unit-root, cointegration and accuracy statistics.

pub mod accuracy;
pub mod critical;
mod johansen;
mod unitroot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use accuracy::{naive_rmsfe, r_squared, rmse};
pub use johansen::{johansen_rank, johansen_trace};
pub use unitroot::{adf_test, pp_test, residual_cointegration, AdfLag, Bandwidth};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestError {
    #[error("series has {len} usable values, needs at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series do not cover the same years")]
    RangeMismatch,
    #[error("moment matrices are singular")]
    SingularMoments,
    #[error("degenerate regression: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, TestError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    #[default]
    Constant,
    ConstantTrend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Reject when the statistic is below the critical value.
    Left,
    /// Reject when the statistic is above the critical value.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Significance {
    P01,
    P05,
    P10,
}

/// One value per conventional significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels<T> {
    #[serde(rename = "1%")]
    pub p01: T,
    #[serde(rename = "5%")]
    pub p05: T,
    #[serde(rename = "10%")]
    pub p10: T,
}

impl<T: Copy> Levels<T> {
    pub fn at(&self, s: Significance) -> T {
        match s {
            Significance::P01 => self.p01,
            Significance::P05 => self.p05,
            Significance::P10 => self.p10,
        }
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Levels<U> {
        Levels {
            p01: f(self.p01),
            p05: f(self.p05),
            p10: f(self.p10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    pub tail: Tail,
    pub critical_values: Levels<f64>,
    pub reject: Levels<bool>,
}

impl Statistic {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        tail: Tail,
        critical_values: Levels<f64>,
    ) -> Self {
        let reject = critical_values.map(|cv| match tail {
            Tail::Left => value < cv,
            Tail::Right => value > cv,
        });
        Self {
            name: name.into(),
            value,
            tail,
            critical_values,
            reject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistics: Vec<Statistic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<Deterministic>,
    pub n_obs: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigenvalues: Vec<f64>,
}

impl TestReport {
    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.statistic(name).map(|s| s.value)
    }

    pub fn rejects(&self, name: &str, s: Significance) -> Option<bool> {
        self.statistic(name).map(|st| st.reject.at(s))
    }
}
