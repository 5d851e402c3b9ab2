//! Smaller tabular inputs: economics, vehicles, AC market, sample profiles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvio::{self, CsvTable};
use super::IngestError;
use crate::calendar::{DayType, Season};
use crate::cooling::CoolingScenario;
use crate::ev::{ChargingScheme, Segment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdpRow {
    pub state: String,
    pub year: i32,
    pub gdp_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRow {
    pub state: String,
    pub year: i32,
    pub pop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSalesRow {
    pub state: String,
    pub year: i32,
    pub segment: Segment,
    pub units: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcMarketRow {
    pub year: i32,
    pub scenario: CoolingScenario,
    pub units_sold: f64,
    pub unit_kwh_year: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvParamsRow {
    pub segment: Segment,
    /// kWh per km
    pub efficiency: f64,
    pub short_kwh: f64,
    pub long_kwh: f64,
    pub urban_km: f64,
    pub rural_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableAnchorRow {
    pub year: i32,
    pub gdp_usd: f64,
}

/// Historical sector consumption per state, used for the commercial to
/// residential ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorRow {
    pub state: String,
    pub year: i32,
    pub residential_mwh: f64,
    pub commercial_mwh: f64,
}

fn positive(file: &str, line: u64, column: &str, value: f64) -> Result<(), IngestError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(IngestError::NonPositiveValue { file: file.into(), row: line, column: column.into(), value })
    }
}

fn non_negative(file: &str, line: u64, column: &str, value: f64) -> Result<(), IngestError> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(IngestError::Invalid { file: file.into(), row: line, message: format!("{column} must be >= 0, got {value}") })
    }
}

pub fn load_gdp_state(path: &Path) -> Result<Vec<GdpRow>, IngestError> {
    let file = csvio::file_label(path);
    let rows = csvio::read_table::<GdpRow>(path, &["state", "year", "gdp_usd"])?;
    rows.into_iter()
        .map(|(line, r)| positive(&file, line, "gdp_usd", r.gdp_usd).map(|_| r))
        .collect()
}

pub fn load_population(path: &Path) -> Result<Vec<PopulationRow>, IngestError> {
    let file = csvio::file_label(path);
    let rows = csvio::read_table::<PopulationRow>(path, &["state", "year", "pop"])?;
    rows.into_iter().map(|(line, r)| positive(&file, line, "pop", r.pop).map(|_| r)).collect()
}

pub fn load_vehicle_sales(path: &Path) -> Result<Vec<VehicleSalesRow>, IngestError> {
    let file = csvio::file_label(path);
    let rows = csvio::read_table::<VehicleSalesRow>(path, &["state", "year", "segment", "units"])?;
    rows.into_iter().map(|(line, r)| non_negative(&file, line, "units", r.units).map(|_| r)).collect()
}

pub fn load_ac_market(path: &Path) -> Result<Vec<AcMarketRow>, IngestError> {
    let file = csvio::file_label(path);
    let rows = csvio::read_table::<AcMarketRow>(path, &["year", "scenario", "units_sold", "unit_kwh_year"])?;
    rows.into_iter()
        .map(|(line, r)| {
            non_negative(&file, line, "units_sold", r.units_sold)?;
            positive(&file, line, "unit_kwh_year", r.unit_kwh_year)?;
            Ok(r)
        })
        .collect()
}

pub fn load_ev_params(path: &Path) -> Result<Vec<EvParamsRow>, IngestError> {
    let file = csvio::file_label(path);
    let rows = csvio::read_table::<EvParamsRow>(
        path,
        &["segment", "efficiency", "short_kwh", "long_kwh", "urban_km", "rural_km"],
    )?;
    rows.into_iter()
        .map(|(line, r)| {
            positive(&file, line, "efficiency", r.efficiency)?;
            positive(&file, line, "short_kwh", r.short_kwh)?;
            positive(&file, line, "urban_km", r.urban_km)?;
            positive(&file, line, "rural_km", r.rural_km)?;
            if r.long_kwh <= r.short_kwh {
                return Err(IngestError::Invalid {
                    file: file.clone(),
                    row: line,
                    message: "long_kwh must exceed short_kwh".into(),
                });
            }
            Ok(r)
        })
        .collect()
}

pub fn load_stable_anchors(path: &Path) -> Result<Vec<StableAnchorRow>, IngestError> {
    let file = csvio::file_label(path);
    let mut rows: Vec<StableAnchorRow> = csvio::read_table::<StableAnchorRow>(path, &["year", "gdp_usd"])?
        .into_iter()
        .map(|(line, r)| positive(&file, line, "gdp_usd", r.gdp_usd).map(|_| r))
        .collect::<Result<_, _>>()?;
    rows.sort_by_key(|r| r.year);
    Ok(rows)
}

pub fn load_sector(path: &Path) -> Result<Vec<SectorRow>, IngestError> {
    let file = csvio::file_label(path);
    let rows = csvio::read_table::<SectorRow>(path, &["state", "year", "residential_mwh", "commercial_mwh"])?;
    rows.into_iter()
        .map(|(line, r)| {
            positive(&file, line, "residential_mwh", r.residential_mwh)?;
            non_negative(&file, line, "commercial_mwh", r.commercial_mwh)?;
            Ok(r)
        })
        .collect()
}

macro_rules! writer {
    ($name:ident, $ty:ty) => {
        pub fn $name(path: &Path, rows: &[$ty]) -> Result<(), IngestError> {
            csvio::write_table(path, rows)
        }
    };
}

writer!(write_gdp_state, GdpRow);
writer!(write_population, PopulationRow);
writer!(write_vehicle_sales, VehicleSalesRow);
writer!(write_ac_market, AcMarketRow);
writer!(write_ev_params, EvParamsRow);
writer!(write_stable_anchors, StableAnchorRow);
writer!(write_sector, SectorRow);

/// What a sample profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileContext {
    Residential,
    Commercial,
    Charging(ChargingScheme),
}

impl ProfileContext {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileContext::Residential => "residential",
            ProfileContext::Commercial => "commercial",
            ProfileContext::Charging(s) => s.as_str(),
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "residential" => Some(ProfileContext::Residential),
            "commercial" => Some(ProfileContext::Commercial),
            other => other.parse::<ChargingScheme>().ok().map(ProfileContext::Charging),
        }
    }
}

/// A surveyed 24-hour demand shape, normalized to sum 1.
///
/// `season`, `income` and `daytype` are `None` when the profile applies to
/// every value of that attribute. Income tiers are ordered from poorest (0).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleProfile {
    pub context: ProfileContext,
    pub season: Option<Season>,
    pub income: Option<u8>,
    pub daytype: Option<DayType>,
    pub values: [f64; 24],
}

impl SampleProfile {
    /// Normalize `values` to sum 1. Fails on negative or all-zero inputs.
    pub fn normalized(
        context: ProfileContext,
        season: Option<Season>,
        income: Option<u8>,
        daytype: Option<DayType>,
        mut values: [f64; 24],
    ) -> Result<Self, String> {
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err("profile values must be finite and nonnegative".into());
        }
        let sum: f64 = values.iter().sum();
        if sum <= 0.0 {
            return Err("profile has no positive weight".into());
        }
        if (sum - 1.0).abs() > 1e-12 {
            values.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(SampleProfile { context, season, income, daytype, values })
    }
}

const INCOME_LABELS: [&str; 3] = ["low", "mid", "high"];

fn parse_income(text: &str) -> Option<Option<u8>> {
    if text.is_empty() || text == "all" {
        return Some(None);
    }
    if let Some(i) = INCOME_LABELS.iter().position(|l| *l == text) {
        return Some(Some(i as u8));
    }
    if text == "middle" {
        return Some(Some(1));
    }
    text.parse::<u8>().ok().map(Some)
}

fn income_label(tier: Option<u8>) -> String {
    match tier {
        None => String::new(),
        Some(t) => INCOME_LABELS.get(t as usize).map(|s| s.to_string()).unwrap_or_else(|| t.to_string()),
    }
}

fn parse_season(text: &str) -> Option<Option<Season>> {
    match text {
        "" | "all" => Some(None),
        "summer" => Some(Some(Season::Summer)),
        "winter" => Some(Some(Season::Winter)),
        _ => None,
    }
}

fn parse_daytype(text: &str) -> Option<Option<DayType>> {
    match text {
        "" | "all" => Some(None),
        "weekday" => Some(Some(DayType::Weekday)),
        "weekend" => Some(Some(DayType::Weekend)),
        _ => None,
    }
}

const HOUR_COLUMNS: [&str; 24] = [
    "h0", "h1", "h2", "h3", "h4", "h5", "h6", "h7", "h8", "h9", "h10", "h11", "h12", "h13", "h14", "h15", "h16", "h17",
    "h18", "h19", "h20", "h21", "h22", "h23",
];

/// Load `profiles.csv` (context,season,income,daytype,h0..h23).
pub fn load_profiles(path: &Path) -> Result<Vec<SampleProfile>, IngestError> {
    let mut table = CsvTable::open(path)?;
    let meta = table.columns(&["context", "season", "income", "daytype"])?;
    let hours = table.columns(&HOUR_COLUMNS)?;
    let file = table.file.clone();
    let mut out = Vec::new();
    table.for_each_byte_record(|line, rec| {
        let text = |i: usize, name: &str| csvio::field(&file, line, rec, i, name).map(str::to_ascii_lowercase);
        let bad = |column: &str, value: String| IngestError::Parse { file: file.clone(), row: line, column: column.into(), value };
        let context_text = text(meta[0], "context")?;
        let context = ProfileContext::parse(&context_text).ok_or_else(|| bad("context", context_text.clone()))?;
        let season_text = text(meta[1], "season")?;
        let season = parse_season(&season_text).ok_or_else(|| bad("season", season_text.clone()))?;
        let income_text = text(meta[2], "income")?;
        let income = parse_income(&income_text).ok_or_else(|| bad("income", income_text.clone()))?;
        let daytype_text = text(meta[3], "daytype")?;
        let daytype = parse_daytype(&daytype_text).ok_or_else(|| bad("daytype", daytype_text.clone()))?;
        let mut values = [0.0; 24];
        for (h, &i) in hours.iter().enumerate() {
            values[h] = csvio::parse_f64(&file, line, HOUR_COLUMNS[h], csvio::field(&file, line, rec, i, HOUR_COLUMNS[h])?)?;
        }
        let profile = SampleProfile::normalized(context, season, income, daytype, values)
            .map_err(|message| IngestError::Invalid { file: file.clone(), row: line, message })?;
        out.push(profile);
        Ok(())
    })?;
    Ok(out)
}

pub fn write_profiles(path: &Path, profiles: &[SampleProfile]) -> Result<(), IngestError> {
    let mut w = csvio::create_writer(path)?;
    let csv_err = |e: csv::Error| IngestError::Csv { file: csvio::file_label(path), message: e.to_string() };
    let mut header = vec!["context", "season", "income", "daytype"];
    header.extend(HOUR_COLUMNS);
    w.write_record(&header).map_err(csv_err)?;
    for p in profiles {
        let mut row = vec![
            p.context.as_str().to_string(),
            p.season.map(|s| s.as_str().to_string()).unwrap_or_default(),
            income_label(p.income),
            p.daytype.map(|d| d.as_str().to_string()).unwrap_or_default(),
        ];
        row.extend(p.values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    csvio::finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn profiles_are_normalized_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.csv");
        let mut body = String::from("context,season,income,daytype");
        for h in 0..24 {
            body.push_str(&format!(",h{h}"));
        }
        body.push_str("\nresidential,summer,low,weekday");
        for h in 0..24 {
            body.push_str(&format!(",{}", h + 1));
        }
        body.push_str("\nhome,,,");
        for _ in 0..24 {
            body.push_str(",2");
        }
        body.push('\n');
        std::fs::write(&path, body).unwrap();
        let ps = load_profiles(&path).unwrap();
        assert_eq!(ps.len(), 2);
        assert!((ps[0].values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(ps[0].income, Some(0));
        assert_eq!(ps[1].context, ProfileContext::Charging(ChargingScheme::Home));
        assert_eq!(ps[1].season, None);
        assert!((ps[1].values[5] - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn ev_params_need_long_range_above_short() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ev_params.csv");
        std::fs::write(&path, "segment,efficiency,short_kwh,long_kwh,urban_km,rural_km\nE2W,0.025,3,2,25,40\n").unwrap();
        assert!(matches!(load_ev_params(&path), Err(IngestError::Invalid { .. })));
    }

    #[test]
    fn gdp_must_be_positive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gdp_state.csv");
        std::fs::write(&path, "state,year,gdp_usd\nTN,2015,-1\n").unwrap();
        assert!(matches!(load_gdp_state(&path), Err(IngestError::NonPositiveValue { .. })));
    }

    proptest! {
        #[test]
        fn gdp_and_market_tables_round_trip(
            gdp in prop::collection::vec((1990i32..2050, 1e6f64..1e13), 1..20),
            market in prop::collection::vec((2000i32..2050, any::<bool>(), 0f64..1e8, 1f64..4000.0), 1..20),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let gdp_rows: Vec<GdpRow> = gdp.iter().map(|(y, v)| GdpRow { state: "TN".into(), year: *y, gdp_usd: *v }).collect();
            let path = dir.path().join("gdp_state.csv");
            write_gdp_state(&path, &gdp_rows).unwrap();
            prop_assert_eq!(load_gdp_state(&path).unwrap(), gdp_rows);

            let market_rows: Vec<AcMarketRow> = market
                .iter()
                .map(|(y, eff, units, kwh)| AcMarketRow {
                    year: *y,
                    scenario: if *eff { CoolingScenario::Efficient } else { CoolingScenario::Baseline },
                    units_sold: *units,
                    unit_kwh_year: *kwh,
                })
                .collect();
            let path = dir.path().join("ac_market.csv");
            write_ac_market(&path, &market_rows).unwrap();
            prop_assert_eq!(load_ac_market(&path).unwrap(), market_rows);
        }

        #[test]
        fn profiles_round_trip(raw in prop::collection::vec(prop::array::uniform24(0.0f64..10.0), 1..6), tier in 0u8..3) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("profiles.csv");
            let profiles: Vec<SampleProfile> = raw
                .into_iter()
                .filter(|v| v.iter().sum::<f64>() > 0.0)
                .map(|v| SampleProfile::normalized(ProfileContext::Residential, Some(Season::Winter), Some(tier), Some(DayType::Weekend), v).unwrap())
                .collect();
            write_profiles(&path, &profiles).unwrap();
            prop_assert_eq!(load_profiles(&path).unwrap(), profiles);
        }
    }
}
