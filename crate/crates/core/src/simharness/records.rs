use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SinrVsM,
    RateVsM,
    SinrCdf,
    BerVsK,
    SumRateVsSir,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::SinrVsM,
        ExperimentKind::RateVsM,
        ExperimentKind::SinrCdf,
        ExperimentKind::BerVsK,
        ExperimentKind::SumRateVsSir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SinrVsM => "sinr_vs_m",
            ExperimentKind::RateVsM => "rate_vs_m",
            ExperimentKind::SinrCdf => "sinr_cdf",
            ExperimentKind::BerVsK => "ber_vs_k",
            ExperimentKind::SumRateVsSir => "sum_rate_vs_sir",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::SinrVsM => "UL SINR of reference-cell users vs. antenna count, users on a circle",
            ExperimentKind::RateVsM => "UL rate with 16-QAM vs. antenna count, users on a circle",
            ExperimentKind::SinrCdf => "distribution of UL SINR over uniform user placements",
            ExperimentKind::BerVsK => "UL BER vs. users per cell at fixed M/K",
            ExperimentKind::SumRateVsSir => "cell sum rate of TP, SP and hybrid systems vs. received SIR",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment `{s}`")))
    }
}

/// Receiver, or pilot system for sum-rate experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    TpLs,
    SpNoniter,
    /// Iterative SP after the given iteration.
    SpIter(usize),
    Hybrid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::TpLs => f.write_str("TP-LS"),
            Method::SpNoniter => f.write_str("SP-noniter"),
            Method::SpIter(i) => write!(f, "SP-iter({i})"),
            Method::Hybrid => f.write_str("hybrid"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "TP-LS" => Ok(Method::TpLs),
            "SP-noniter" => Ok(Method::SpNoniter),
            "hybrid" => Ok(Method::Hybrid),
            _ => s
                .strip_prefix("SP-iter(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|i| i.parse().ok())
                .map(Method::SpIter)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    /// Linear SINR.
    Sinr,
    /// bps/Hz.
    Rate,
    Ber,
    /// Empirical CDF at the sweep value.
    Cdf,
    /// Reference-cell sum rate, bps/Hz.
    SumRate,
    /// Number of reference-cell users assigned to SP.
    SpUsers,
}

impl Metric {
    const ALL: [Metric; 6] = [Metric::Sinr, Metric::Rate, Metric::Ber, Metric::Cdf, Metric::SumRate, Metric::SpUsers];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Sinr => "sinr",
            Metric::Rate => "rate",
            Metric::Ber => "ber",
            Metric::Cdf => "cdf",
            Metric::SumRate => "sum_rate",
            Metric::SpUsers => "sp_users",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown metric `{s}`")))
    }
}

/// A single user (flattened index) or an aggregate over the reference cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UserTag {
    User(usize),
    All,
}

impl fmt::Display for UserTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserTag::User(u) => write!(f, "{u}"),
            UserTag::All => f.write_str("all"),
        }
    }
}

impl FromStr for UserTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "all" {
            return Ok(UserTag::All);
        }
        s.parse().map(UserTag::User).map_err(|_| Error::InvalidConfig(format!("bad user tag `{s}`")))
    }
}

/// One measured value at one sweep point; one CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub experiment: ExperimentKind,
    pub method: Method,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub user: UserTag,
    pub metric: Metric,
    pub value: f64,
    pub trials: usize,
    /// Closed-form companion, where one exists.
    pub analytic_value: Option<f64>,
}
