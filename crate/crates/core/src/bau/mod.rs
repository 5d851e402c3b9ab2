//! Business-as-usual demand: weather and GDP features, elastic-net
//! regressions per region and target, and daily projections.

mod enet;
mod features;
mod model;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enet::{alpha_grid, alpha_max, fit_elastic_net, EnetFit, EnetOptions};
pub use features::{
    build_features, raw_features, FeatureMatrix, RawFeatures, Standardization, WeatherIndex, GDP_COLUMN,
};
pub use model::{project_daily, select_alpha, AlphaSelection, BauConfig, PenalizedLinearModel, Projection};

use crate::ingest::Region;

#[derive(Debug, Error)]
pub enum BauError {
    #[error("no weather for {city} on {date}")]
    MissingWeatherDay { city: String, date: NaiveDate },
    #[error("no GDP for {region} in {year}")]
    MissingGdp { region: Region, year: i32 },
    #[error("no demand for {region} on {date}")]
    MissingDemandDay { region: Region, date: NaiveDate },
    #[error("feature columns differ from training: {0}")]
    FeatureMismatch(String),
    #[error("coordinate descent did not converge in {sweeps} sweeps (alpha {alpha})")]
    NoConvergence { sweeps: usize, alpha: f64 },
    #[error("x has {rows} rows but y has {len} values")]
    ShapeMismatch { rows: usize, len: usize },
    #[error("need at least {required} rows, got {found}")]
    TooFewRows { found: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("actual values are constant, R-squared is undefined")]
    ZeroVariance,
    #[error("empty alpha grid")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Peak,
    Energy,
}

impl Target {
    pub const ALL: [Target; 2] = [Target::Peak, Target::Energy];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Peak => "peak",
            Target::Energy => "energy",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "peak" => Ok(Target::Peak),
            "energy" => Ok(Target::Energy),
            other => Err(format!("unknown target `{other}`")),
        }
    }
}

/// Daily values for one region and target: MW for peak, MWh for energy.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub region: Region,
    pub target: Target,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }
}

/// Coefficient of determination 1 - SSE/SST.
pub fn r_squared(pred: &[f64], actual: &[f64]) -> Result<f64, BauError> {
    if pred.len() != actual.len() {
        return Err(BauError::ShapeMismatch { rows: pred.len(), len: actual.len() });
    }
    if actual.len() < 2 {
        return Err(BauError::TooFewRows { found: actual.len(), required: 2 });
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(BauError::ZeroVariance);
    }
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (a - p).powi(2)).sum();
    Ok(1.0 - sse / sst)
}

pub(crate) fn rmse(pred: &[f64], actual: &[f64]) -> f64 {
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (a - p).powi(2)).sum();
    (sse / actual.len().max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_squared_reference_values() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r_squared(&a, &a).unwrap(), 1.0);
        assert_eq!(r_squared(&[2.5; 4], &a).unwrap(), 0.0);
        // reversed: SSE = 9+1+1+9 = 20, SST = 5
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert!((r_squared(&rev, &a).unwrap() - (1.0 - 20.0 / 5.0)).abs() < 1e-15);
        assert!(matches!(r_squared(&a, &[3.0; 4]), Err(BauError::ZeroVariance)));
    }
}
