//! Electric-vehicle demand: sales from GDP, electrification shares, fleet
//! turnover, charging energy and hourly charging profiles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{model_days, DayType};
use crate::cooling::circular_convolve;
use crate::gdp::{GdpPath, GdpScenario};
use crate::ingest::{EvParamsRow, ProfileContext, SampleProfile, VehicleSalesRow};

#[derive(Debug, Error)]
pub enum EvError {
    #[error("{state} {segment}: need at least 3 sales years, got {found}")]
    InsufficientHistory { state: String, segment: Segment, found: usize },
    #[error("no {scheme} charging profile for {daytype}")]
    MissingProfile { scheme: ChargingScheme, daytype: &'static str },
    #[error("no parameters for segment {0}")]
    MissingSegment(Segment),
    #[error("invalid EV parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Segment {
    E2W,
    E3W,
    E4W,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::E2W, Segment::E3W, Segment::E4W];

    pub fn as_str(self) -> &'static str {
        match self {
            Segment::E2W => "E2W",
            Segment::E3W => "E3W",
            Segment::E4W => "E4W",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Segment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "E2W" => Ok(Segment::E2W),
            "E3W" => Ok(Segment::E3W),
            "E4W" => Ok(Segment::E4W),
            _ => Err(format!("unknown vehicle segment `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargingScheme {
    Home,
    Work,
    Public,
}

impl ChargingScheme {
    pub const ALL: [ChargingScheme; 3] = [ChargingScheme::Home, ChargingScheme::Work, ChargingScheme::Public];

    pub fn as_str(self) -> &'static str {
        match self {
            ChargingScheme::Home => "home",
            ChargingScheme::Work => "work",
            ChargingScheme::Public => "public",
        }
    }
}

impl fmt::Display for ChargingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChargingScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "home" => Ok(ChargingScheme::Home),
            "work" => Ok(ChargingScheme::Work),
            "public" => Ok(ChargingScheme::Public),
            other => Err(format!("unknown charging scheme `{other}`")),
        }
    }
}

/// One value per vehicle segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerSegment<T> {
    #[serde(rename = "E2W")]
    pub e2w: T,
    #[serde(rename = "E3W")]
    pub e3w: T,
    #[serde(rename = "E4W")]
    pub e4w: T,
}

impl<T: Copy> PerSegment<T> {
    pub fn get(&self, segment: Segment) -> T {
        match segment {
            Segment::E2W => self.e2w,
            Segment::E3W => self.e3w,
            Segment::E4W => self.e4w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleSegment {
    pub segment: Segment,
    /// kWh per km
    pub efficiency: f64,
    pub short_range_kwh: f64,
    pub long_range_kwh: f64,
    pub urban_km: f64,
    pub rural_km: f64,
}

impl VehicleSegment {
    pub fn from_row(row: &EvParamsRow) -> Result<Self, EvError> {
        if !(row.efficiency > 0.0) {
            return Err(EvError::Invalid(format!("{}: efficiency must be positive", row.segment)));
        }
        if !(row.long_kwh > row.short_kwh) {
            return Err(EvError::Invalid(format!("{}: long-range battery must exceed short-range", row.segment)));
        }
        if !(row.urban_km > 0.0 && row.rural_km > 0.0) {
            return Err(EvError::Invalid(format!("{}: commute distances must be positive", row.segment)));
        }
        Ok(VehicleSegment {
            segment: row.segment,
            efficiency: row.efficiency,
            short_range_kwh: row.short_kwh,
            long_range_kwh: row.long_kwh,
            urban_km: row.urban_km,
            rural_km: row.rural_km,
        })
    }
}

pub fn segments_from_rows(rows: &[EvParamsRow]) -> Result<BTreeMap<Segment, VehicleSegment>, EvError> {
    let map: BTreeMap<Segment, VehicleSegment> =
        rows.iter().map(|r| VehicleSegment::from_row(r).map(|v| (r.segment, v))).collect::<Result<_, _>>()?;
    for s in Segment::ALL {
        if !map.contains_key(&s) {
            return Err(EvError::MissingSegment(s));
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetYears {
    pub slow: i32,
    pub stable: i32,
    pub rapid: i32,
}

impl TargetYears {
    pub fn get(&self, scenario: GdpScenario) -> i32 {
        match scenario {
            GdpScenario::Slow => self.slow,
            GdpScenario::Stable => self.stable,
            GdpScenario::Rapid => self.rapid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvConfig {
    pub base_year: i32,
    /// Registered EVs nationwide in the base year.
    pub initial_fleet: f64,
    pub lifetime_years: u32,
    pub urban_fraction: f64,
    pub initial_share: PerSegment<f64>,
    pub target_share: PerSegment<f64>,
    pub target_years: TargetYears,
    /// Yearly share increase after the target year for E3W and E4W.
    pub post_target_slope: f64,
    pub range_end_year: i32,
    pub long_range_end: f64,
    pub kernel: Vec<f64>,
}

impl Default for EvConfig {
    fn default() -> Self {
        EvConfig {
            base_year: 2020,
            initial_fleet: 152_000.0,
            lifetime_years: 15,
            urban_fraction: 0.35,
            initial_share: PerSegment { e2w: 0.01, e3w: 0.04, e4w: 0.002 },
            target_share: PerSegment { e2w: 1.0, e3w: 0.30, e4w: 0.30 },
            target_years: TargetYears { slow: 2040, stable: 2035, rapid: 2030 },
            post_target_slope: 0.01,
            range_end_year: 2050,
            long_range_end: 0.8,
            kernel: vec![0.25, 0.5, 0.25],
        }
    }
}

/// EV share of new sales in a segment.
pub fn electrification_share(segment: Segment, scenario: GdpScenario, year: i32, config: &EvConfig) -> f64 {
    let start = config.initial_share.get(segment);
    let target = config.target_share.get(segment).max(start);
    let t0 = config.base_year;
    let t1 = config.target_years.get(scenario);
    let share = if year <= t0 {
        start
    } else if year <= t1 {
        start + (target - start) * f64::from(year - t0) / f64::from(t1 - t0)
    } else {
        match segment {
            Segment::E2W => target,
            _ => target + config.post_target_slope * f64::from(year - t1),
        }
    };
    share.clamp(0.0, 1.0)
}

/// Shares of short- and long-range vehicles in the fleet.
pub fn range_mix(year: i32, config: &EvConfig) -> (f64, f64) {
    let t = (f64::from(year - config.base_year) / f64::from(config.range_end_year - config.base_year)).clamp(0.0, 1.0);
    let long = config.long_range_end * t;
    (1.0 - long, long)
}

/// Linear regression of segment sales on GDP, evaluated on `gdp` for `years`
/// and floored at zero.
pub fn project_sales(
    history: &[(i32, f64)],
    gdp: &GdpPath,
    years: impl IntoIterator<Item = i32>,
    state: &str,
    segment: Segment,
) -> Result<BTreeMap<i32, f64>, EvError> {
    let pts: Vec<(f64, f64)> = history.iter().filter_map(|(y, u)| gdp.get(*y).map(|g| (g, *u))).collect();
    if pts.len() < 3 {
        return Err(EvError::InsufficientHistory { state: state.into(), segment, found: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx } else { 0.0 };
    let mut out = BTreeMap::new();
    let mut floored = 0;
    for y in years {
        let g = gdp.get(y).unwrap_or(mx);
        let mut v = my + slope * (g - mx);
        if v < 0.0 {
            v = 0.0;
            floored += 1;
        }
        out.insert(y, v);
    }
    if floored > 0 {
        warn!("{state} {segment}: {floored} projected sales years floored at zero");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetStateYear {
    pub state: String,
    pub year: i32,
    pub counts: PerSegment<f64>,
    pub urban_fraction: f64,
}

/// EV fleets per state and year for one GDP scenario.
///
/// The base-year fleet equals `initial_fleet`, split over states and
/// segments by base-year EV sales, and retires linearly over one lifetime.
/// Later cohorts are EV sales (segment sales times electrification share)
/// and retire after `lifetime_years`.
pub fn project_fleet(
    sales: &[VehicleSalesRow],
    gdp: &BTreeMap<String, GdpPath>,
    scenario: GdpScenario,
    last_year: i32,
    config: &EvConfig,
) -> Result<BTreeMap<String, Vec<FleetStateYear>>, EvError> {
    let base = config.base_year;
    let mut history: BTreeMap<(&str, Segment), Vec<(i32, f64)>> = BTreeMap::new();
    for r in sales.iter().filter(|r| r.year < base && gdp.contains_key(&r.state)) {
        history.entry((r.state.as_str(), r.segment)).or_default().push((r.year, r.units));
    }
    let mut ev_sales: BTreeMap<(&str, Segment), BTreeMap<i32, f64>> = BTreeMap::new();
    for (state, path) in gdp {
        for segment in Segment::ALL {
            let h = history.get(&(state.as_str(), segment)).map_or(&[][..], Vec::as_slice);
            let total = project_sales(h, path, base..=last_year, state, segment)?;
            let ev = total.into_iter().map(|(y, u)| (y, u * electrification_share(segment, scenario, y, config))).collect();
            ev_sales.insert((state.as_str(), segment), ev);
        }
    }
    let base_total: f64 = ev_sales.values().map(|m| m[&base]).sum();
    let lifetime = config.lifetime_years.max(1) as i32;
    let mut out = BTreeMap::new();
    for state in gdp.keys() {
        let mut years = Vec::new();
        for year in base..=last_year {
            let mut counts = [0.0; 3];
            for (i, segment) in Segment::ALL.into_iter().enumerate() {
                let s = &ev_sales[&(state.as_str(), segment)];
                let initial = if base_total > 0.0 { config.initial_fleet * s[&base] / base_total } else { 0.0 };
                let survive = (1.0 - f64::from(year - base) / f64::from(lifetime)).max(0.0);
                let cohorts: f64 = ((year - lifetime + 1).max(base + 1)..=year).map(|c| s[&c]).sum();
                counts[i] = initial * survive + cohorts;
            }
            years.push(FleetStateYear {
                state: state.clone(),
                year,
                counts: PerSegment { e2w: counts[0], e3w: counts[1], e4w: counts[2] },
                urban_fraction: config.urban_fraction,
            });
        }
        out.insert(state.clone(), years);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DailyCharging {
    pub energy_kwh: f64,
    pub sessions: f64,
    pub kwh_per_session: f64,
}

/// Daily charging of a fleet: urban drivers charge every other day, rural
/// drivers every day.
pub fn fleet_energy_day(urban: f64, rural: f64, params: &VehicleSegment) -> DailyCharging {
    let energy_kwh = (urban * params.urban_km + rural * params.rural_km) * params.efficiency;
    let sessions = urban * 0.5 + rural;
    let kwh_per_session = if sessions > 0.0 { energy_kwh / sessions } else { 0.0 };
    DailyCharging { energy_kwh, sessions, kwh_per_session }
}

/// Charging profile of a scheme for a day type, spread by the range mix.
/// Short-range vehicles use the smoothed profile, long-range vehicles a
/// twice-smoothed one.
pub fn charging_profile(
    profiles: &[SampleProfile],
    scheme: ChargingScheme,
    daytype: DayType,
    mix: (f64, f64),
    kernel: &[f64],
) -> Result<[f64; 24], EvError> {
    let p = profiles
        .iter()
        .filter(|p| p.context == ProfileContext::Charging(scheme) && p.daytype.is_none_or(|d| d == daytype))
        .max_by_key(|p| p.daytype.is_some())
        .ok_or(EvError::MissingProfile { scheme, daytype: daytype.as_str() })?;
    let once = circular_convolve(&p.values, kernel);
    let twice = circular_convolve(&once, kernel);
    let blended: [f64; 24] = std::array::from_fn(|h| mix.0 * once[h] + mix.1 * twice[h]);
    let sum: f64 = blended.iter().sum();
    Ok(blended.map(|v| v / sum))
}

/// Hourly MW trace for a constant daily energy in MWh.
pub fn ev_hourly(daily_mwh: f64, year: i32, weekday: &[f64; 24], weekend: &[f64; 24]) -> Vec<f64> {
    let mut out = Vec::with_capacity(8760);
    for d in model_days(year) {
        let p = match DayType::of(d) {
            DayType::Weekday => weekday,
            DayType::Weekend => weekend,
        };
        out.extend(p.iter().map(|w| daily_mwh * w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> VehicleSegment {
        VehicleSegment {
            segment: Segment::E2W,
            efficiency: 0.025,
            short_range_kwh: 2.0,
            long_range_kwh: 4.0,
            urban_km: 25.0,
            rural_km: 40.0,
        }
    }

    #[test]
    fn urban_charging_arithmetic() {
        let d = fleet_energy_day(1000.0, 0.0, &params());
        assert!((d.energy_kwh - 625.0).abs() < 1e-9);
        assert_eq!(d.sessions, 500.0);
        assert!((d.kwh_per_session - 1.25).abs() < 1e-12);
        assert_eq!(fleet_energy_day(0.0, 0.0, &params()), DailyCharging { energy_kwh: 0.0, sessions: 0.0, kwh_per_session: 0.0 });
        assert_eq!(fleet_energy_day(0.0, 300.0, &params()).sessions, 300.0);
    }

    #[test]
    fn rapid_targets_by_2030() {
        let c = EvConfig::default();
        assert_eq!(electrification_share(Segment::E2W, GdpScenario::Rapid, 2030, &c), 1.0);
        assert_eq!(electrification_share(Segment::E4W, GdpScenario::Rapid, 2030, &c), 0.30);
        assert_eq!(electrification_share(Segment::E3W, GdpScenario::Rapid, 2030, &c), 0.30);
        let mid = electrification_share(Segment::E2W, GdpScenario::Rapid, 2025, &c);
        assert!((mid - (c.initial_share.e2w + 1.0) / 2.0).abs() < 1e-15);
        for s in Segment::ALL {
            for g in GdpScenario::ALL {
                let v: Vec<f64> = (2020..=2050).map(|y| electrification_share(s, g, y, &c)).collect();
                assert!(v.windows(2).all(|w| w[0] <= w[1]));
                assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }
    }

    #[test]
    fn range_mix_endpoints() {
        let c = EvConfig::default();
        assert_eq!(range_mix(2020, &c), (1.0, 0.0));
        let (s, l) = range_mix(2050, &c);
        assert!((s - 0.2).abs() < 1e-15 && (l - 0.8).abs() < 1e-15);
        let (s, l) = range_mix(2035, &c);
        assert!((s - 0.6).abs() < 1e-15 && (l - 0.4).abs() < 1e-15);
    }

    fn path(values: &[(i32, f64)]) -> GdpPath {
        GdpPath { geography: "X".into(), scenario: GdpScenario::Rapid, values: values.iter().copied().collect() }
    }

    #[test]
    fn sales_regression_cases() {
        let gdp = path(&[(2015, 1.0), (2016, 2.0), (2017, 3.0), (2030, 10.0)]);
        let prop = project_sales(&[(2015, 5.0), (2016, 10.0), (2017, 15.0)], &gdp, [2030], "X", Segment::E2W).unwrap();
        assert!((prop[&2030] - 50.0).abs() < 1e-9);
        let flat = project_sales(&[(2015, 7.0), (2016, 7.0), (2017, 7.0)], &gdp, [2030], "X", Segment::E2W).unwrap();
        assert!((flat[&2030] - 7.0).abs() < 1e-12);
        let gdp = path(&[(2015, 1.0), (2016, 2.0), (2017, 3.0), (2020, 0.1)]);
        let floor = project_sales(&[(2015, 1.0), (2016, 10.0), (2017, 19.0)], &gdp, [2020], "X", Segment::E2W).unwrap();
        assert_eq!(floor[&2020], 0.0);
        assert!(matches!(
            project_sales(&[(2015, 1.0)], &gdp, [2020], "X", Segment::E2W),
            Err(EvError::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn hourly_trace_conserves_daily_energy() {
        let mut v = [0.5; 24];
        v[19] = 5.0;
        let profiles = vec![SampleProfile::normalized(ProfileContext::Charging(ChargingScheme::Home), None, None, None, v).unwrap()];
        let p = charging_profile(&profiles, ChargingScheme::Home, DayType::Weekday, (0.6, 0.4), &[0.25, 0.5, 0.25]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let trace = ev_hourly(12.0, 2030, &p, &p);
        assert!((trace.iter().sum::<f64>() - 365.0 * 12.0).abs() < 1e-9 * 365.0 * 12.0);
        assert!(matches!(
            charging_profile(&profiles, ChargingScheme::Work, DayType::Weekday, (1.0, 0.0), &[1.0]),
            Err(EvError::MissingProfile { .. })
        ));
    }
}
