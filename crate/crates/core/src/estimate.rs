use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an SOP value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Analytic,
    Asymptotic,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Analytic, Method::Asymptotic, Method::MonteCarlo];

    /// Short name used in CSV headers and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" | "ana" => Ok(Method::Analytic),
            "asymptotic" | "asy" => Ok(Method::Asymptotic),
            "mc" | "monte-carlo" | "montecarlo" | "sim" => Ok(Method::MonteCarlo),
            _ => Err(Error::invalid(format!(
                "unknown method `{s}` (expected analytic, asymptotic or mc)"
            ))),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A secrecy outage probability together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopEstimate {
    pub value: f64,
    /// Binomial standard error for Monte Carlo, 0 otherwise.
    pub standard_error: f64,
    /// 0 unless Monte Carlo.
    pub sample_count: u64,
    pub method: Method,
}

impl SopEstimate {
    pub(crate) fn closed_form(raw: f64, method: Method) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            standard_error: 0.0,
            sample_count: 0,
            method,
        }
    }

    pub fn analytic(raw: f64) -> Self {
        Self::closed_form(raw, Method::Analytic)
    }

    pub fn asymptotic(raw: f64) -> Self {
        Self::closed_form(raw, Method::Asymptotic)
    }

    pub fn from_counts(outages: u64, samples: u64) -> Self {
        let value = if samples == 0 {
            0.0
        } else {
            outages as f64 / samples as f64
        };
        let standard_error = if samples == 0 {
            0.0
        } else {
            (value * (1.0 - value) / samples as f64).sqrt()
        };
        Self {
            value,
            standard_error,
            sample_count: samples,
            method: Method::MonteCarlo,
        }
    }
}
