//! Typed ingestion of every external input.
//!
//! Inputs are local CSV files with headers. Loaders validate as they parse
//! and report the first offending row; [`validate_bundle`] collects every
//! problem in a data directory into one report instead.

mod bundle;
mod catalog;
pub(crate) mod csvio;
mod demand;
mod reference;
mod tables;
mod weather;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bundle::{files, validate_bundle, FileStatus, InputBundle, RegionCoverage, ValidationReport};
pub use catalog::{City, CityCatalog, StateMap};
pub use csvio::{format_timestamp, parse_timestamp};
pub use demand::{load_daily_demand, write_daily_demand, DailyDemandRecord};
pub use reference::{load_reference_year, write_reference_years, ReferenceLoadYear};
pub use tables::{
    load_ac_market, load_ev_params, load_gdp_state, load_population, load_profiles, load_sector, load_stable_anchors,
    load_vehicle_sales, write_ac_market, write_ev_params, write_gdp_state, write_population, write_profiles,
    write_sector, write_stable_anchors, write_vehicle_sales, AcMarketRow, EvParamsRow, GdpRow, PopulationRow,
    ProfileContext, SampleProfile, SectorRow, StableAnchorRow, VehicleSalesRow,
};
pub use weather::{
    aggregate_weather_daily, load_weather_daily, read_weather_samples, write_weather_samples, DailyAggregator,
    DailyStat, WeatherDaily, WeatherSample, MIN_SAMPLES_PER_DAY, WEATHER_VARIABLES,
};

/// The five regional grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    NR,
    WR,
    ER,
    SR,
    NER,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::NR, Region::WR, Region::ER, Region::SR, Region::NER];

    pub fn code(self) -> &'static str {
        match self {
            Region::NR => "NR",
            Region::WR => "WR",
            Region::ER => "ER",
            Region::SR => "SR",
            Region::NER => "NER",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::NR => "Northern",
            Region::WR => "Western",
            Region::ER => "Eastern",
            Region::SR => "Southern",
            Region::NER => "Northeastern",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NR" => Ok(Region::NR),
            "WR" => Ok(Region::WR),
            "ER" => Ok(Region::ER),
            "SR" => Ok(Region::SR),
            "NER" => Ok(Region::NER),
            other => Err(format!("unknown region `{other}`")),
        }
    }
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed csv: {message}")]
    Csv { file: String, message: String },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file} line {row}: cannot parse {column} value {value:?}")]
    Parse { file: String, row: u64, column: String, value: String },
    #[error("{file} line {row}: {column} must be positive, got {value}")]
    NonPositiveValue { file: String, row: u64, column: String, value: f64 },
    #[error("{file} line {row}: mean load {mean_mw} MW exceeds peak {peak_mw} MW")]
    MeanExceedsPeak { file: String, row: u64, mean_mw: f64, peak_mw: f64 },
    #[error("{file} line {row}: duplicate day {date} for {key}")]
    DuplicateDay { file: String, row: u64, key: String, date: chrono::NaiveDate },
    #[error("weather for {city} on {date}: {found} hourly samples, need at least {required}")]
    IncompleteDay { city: String, date: chrono::NaiveDate, found: usize, required: usize },
    #[error("{file}: {key} has {found} rows, expected {expected}")]
    WrongRowCount { file: String, key: String, found: usize, expected: usize },
    #[error("{file} line {row}: {message}")]
    Invalid { file: String, row: u64, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_codes_round_trip() {
        for r in Region::ALL {
            assert_eq!(r.code().parse::<Region>().unwrap(), r);
        }
        assert!("XX".parse::<Region>().is_err());
        assert_eq!("ner".parse::<Region>().unwrap(), Region::NER);
    }
}
