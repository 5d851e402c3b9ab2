use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use super::*;
use crate::calendar;
use crate::cooling::CoolingScenario;
use crate::ev::{ChargingScheme, Segment};

/// Input file names inside a data directory.
pub mod files {
    pub const DEMAND: &str = "demand_daily.csv";
    pub const WEATHER: &str = "weather_hourly.csv";
    pub const REFERENCE: &str = "reference_2015.csv";
    pub const GDP: &str = "gdp_state.csv";
    pub const POPULATION: &str = "population_state.csv";
    pub const VEHICLE_SALES: &str = "vehicle_sales.csv";
    pub const AC_MARKET: &str = "ac_market.csv";
    pub const PROFILES: &str = "profiles.csv";
    pub const EV_PARAMS: &str = "ev_params.csv";
    pub const STABLE_ANCHORS: &str = "gdp_stable_anchors.csv";
    pub const SECTOR: &str = "sector_state.csv";
    pub const STATES: &str = "states.csv";
    pub const CITIES: &str = "cities.csv";

    /// Every file the pipeline reads, in load order.
    pub const ALL: [&str; 13] = [
        STATES, CITIES, DEMAND, WEATHER, REFERENCE, GDP, POPULATION, STABLE_ANCHORS, VEHICLE_SALES, AC_MARKET,
        PROFILES, EV_PARAMS, SECTOR,
    ];
}

/// Every input the pipeline needs, fully validated.
#[derive(Debug, Clone)]
pub struct InputBundle {
    pub states: StateMap,
    pub catalog: CityCatalog,
    pub demand: Vec<DailyDemandRecord>,
    pub weather: Vec<WeatherDaily>,
    pub reference: BTreeMap<Region, ReferenceLoadYear>,
    pub gdp: Vec<GdpRow>,
    pub population: Vec<PopulationRow>,
    pub stable_anchors: Option<Vec<StableAnchorRow>>,
    pub vehicle_sales: Vec<VehicleSalesRow>,
    pub ac_market: Vec<AcMarketRow>,
    pub profiles: Vec<SampleProfile>,
    pub ev_params: Vec<EvParamsRow>,
    pub sector: Vec<SectorRow>,
}

impl InputBundle {
    /// Load a data directory. `cities.csv` and `gdp_stable_anchors.csv` are
    /// optional; the stock city catalog is used when the former is absent.
    pub fn load(dir: &Path) -> Result<Self, IngestError> {
        let p = |name: &str| dir.join(name);
        let catalog = if p(files::CITIES).exists() { CityCatalog::load(&p(files::CITIES))? } else { CityCatalog::default() };
        let stable_anchors = if p(files::STABLE_ANCHORS).exists() {
            Some(load_stable_anchors(&p(files::STABLE_ANCHORS))?)
        } else {
            None
        };
        Ok(InputBundle {
            states: StateMap::load(&p(files::STATES))?,
            catalog,
            demand: load_daily_demand(&p(files::DEMAND))?,
            weather: load_weather_daily(&p(files::WEATHER))?,
            reference: load_reference_year(&p(files::REFERENCE))?,
            gdp: load_gdp_state(&p(files::GDP))?,
            population: load_population(&p(files::POPULATION))?,
            stable_anchors,
            vehicle_sales: load_vehicle_sales(&p(files::VEHICLE_SALES))?,
            ac_market: load_ac_market(&p(files::AC_MARKET))?,
            profiles: load_profiles(&p(files::PROFILES))?,
            ev_params: load_ev_params(&p(files::EV_PARAMS))?,
            sector: load_sector(&p(files::SECTOR))?,
        })
    }

    pub fn input_paths(dir: &Path) -> Vec<PathBuf> {
        files::ALL.iter().map(|f| dir.join(f)).filter(|p| p.exists()).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileStatus {
    pub file: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionCoverage {
    pub region: Region,
    pub days_present: usize,
    pub days_expected: usize,
    pub first: Option<NaiveDate>,
    pub last: Option<NaiveDate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub files: Vec<FileStatus>,
    pub demand_coverage: Vec<RegionCoverage>,
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn flags(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.contains(needle)) || self.files.iter().any(|f| !f.ok && f.detail.contains(needle))
    }
}

fn status<T>(files: &mut Vec<FileStatus>, name: &str, result: Result<T, IngestError>, detail: impl Fn(&T) -> String) -> Option<T> {
    match result {
        Ok(v) => {
            files.push(FileStatus { file: name.into(), ok: true, detail: detail(&v) });
            Some(v)
        }
        Err(e) => {
            files.push(FileStatus { file: name.into(), ok: false, detail: e.to_string() });
            None
        }
    }
}

/// Check every input in `dir` and report all problems instead of stopping at
/// the first.
pub fn validate_bundle(dir: &Path) -> ValidationReport {
    let p = |name: &str| dir.join(name);
    let mut fs = Vec::new();
    let mut issues = Vec::new();

    let states = status(&mut fs, files::STATES, StateMap::load(&p(files::STATES)), |m| format!("{} states", m.len()));
    let catalog = if p(files::CITIES).exists() {
        status(&mut fs, files::CITIES, CityCatalog::load(&p(files::CITIES)), |c| format!("{} cities", c.all_cities().count()))
    } else {
        fs.push(FileStatus { file: files::CITIES.into(), ok: true, detail: "absent, stock catalog used".into() });
        Some(CityCatalog::default())
    };
    let demand = status(&mut fs, files::DEMAND, load_daily_demand(&p(files::DEMAND)), |d| format!("{} records", d.len()));
    let weather = status(&mut fs, files::WEATHER, load_weather_daily(&p(files::WEATHER)), |w| format!("{} city-days", w.len()));
    let reference =
        status(&mut fs, files::REFERENCE, load_reference_year(&p(files::REFERENCE)), |r| format!("{} regions", r.len()));
    let gdp = status(&mut fs, files::GDP, load_gdp_state(&p(files::GDP)), |g| format!("{} rows", g.len()));
    let population = status(&mut fs, files::POPULATION, load_population(&p(files::POPULATION)), |g| format!("{} rows", g.len()));
    if p(files::STABLE_ANCHORS).exists() {
        status(&mut fs, files::STABLE_ANCHORS, load_stable_anchors(&p(files::STABLE_ANCHORS)), |a| format!("{} anchors", a.len()));
    } else {
        issues.push(format!("{} absent: the stable GDP scenario cannot be projected", files::STABLE_ANCHORS));
    }
    let sales = status(&mut fs, files::VEHICLE_SALES, load_vehicle_sales(&p(files::VEHICLE_SALES)), |s| format!("{} rows", s.len()));
    let market = status(&mut fs, files::AC_MARKET, load_ac_market(&p(files::AC_MARKET)), |s| format!("{} rows", s.len()));
    let profiles = status(&mut fs, files::PROFILES, load_profiles(&p(files::PROFILES)), |s| format!("{} profiles", s.len()));
    let ev_params = status(&mut fs, files::EV_PARAMS, load_ev_params(&p(files::EV_PARAMS)), |s| format!("{} segments", s.len()));
    status(&mut fs, files::SECTOR, load_sector(&p(files::SECTOR)), |s| format!("{} rows", s.len()));

    let training = calendar::training_days();
    let mut coverage = Vec::new();
    if let Some(demand) = &demand {
        for region in Region::ALL {
            let days: BTreeSet<NaiveDate> = demand
                .iter()
                .filter(|r| r.region == region && training.binary_search(&r.date).is_ok())
                .map(|r| r.date)
                .collect();
            if days.len() < training.len() {
                issues.push(format!(
                    "demand coverage gap: region {region} has {} of {} training days",
                    days.len(),
                    training.len()
                ));
            }
            coverage.push(RegionCoverage {
                region,
                days_present: days.len(),
                days_expected: training.len(),
                first: days.iter().next().copied(),
                last: days.iter().next_back().copied(),
            });
        }
    }

    if let Some(catalog) = &catalog {
        for diff in catalog.differences_from_default() {
            issues.push(format!("city catalog: {diff}"));
        }
        if let Some(weather) = &weather {
            let mut per_city: BTreeMap<&str, usize> = BTreeMap::new();
            let window: HashSet<NaiveDate> = training.iter().copied().collect();
            for w in weather.iter().filter(|w| window.contains(&w.date)) {
                *per_city.entry(w.city.as_str()).or_default() += 1;
            }
            for (region, city) in catalog.all_cities() {
                let days = per_city.get(city.name.as_str()).copied().unwrap_or(0);
                if days < training.len() {
                    issues.push(format!(
                        "weather coverage gap: {region} city {} has {days} of {} training days",
                        city.name,
                        training.len()
                    ));
                }
            }
        }
    }

    if let Some(reference) = &reference {
        for region in Region::ALL.iter().filter(|r| !reference.contains_key(r)) {
            issues.push(format!("reference year: region {region} missing"));
        }
    }

    if let Some(states) = &states {
        for region in Region::ALL {
            if states.states_in(region).is_empty() {
                issues.push(format!("state map: region {region} has no states"));
            }
        }
        let mut check_states = |label: &str, names: Vec<&str>| {
            let unknown: BTreeSet<&str> = names.into_iter().filter(|s| states.region_of(s).is_none()).collect();
            for s in unknown {
                issues.push(format!("{label}: state {s} is not in {}", files::STATES));
            }
        };
        if let Some(g) = &gdp {
            check_states(files::GDP, g.iter().map(|r| r.state.as_str()).collect());
        }
        if let Some(g) = &population {
            check_states(files::POPULATION, g.iter().map(|r| r.state.as_str()).collect());
        }
        if let Some(g) = &sales {
            check_states(files::VEHICLE_SALES, g.iter().map(|r| r.state.as_str()).collect());
        }
        if let Some(g) = &gdp {
            for (state, _) in states.states() {
                if !g.iter().any(|r| r.state == state) {
                    issues.push(format!("{}: no GDP history for state {state}", files::GDP));
                }
            }
        }
    }

    if let Some(market) = &market {
        for scenario in [CoolingScenario::Baseline, CoolingScenario::Efficient] {
            if !market.iter().any(|r| r.scenario == scenario) {
                issues.push(format!("{}: no {} rows", files::AC_MARKET, scenario.as_str()));
            }
        }
    }
    if let Some(profiles) = &profiles {
        for context in [ProfileContext::Residential, ProfileContext::Commercial] {
            for season in [calendar::Season::Summer, calendar::Season::Winter] {
                if !profiles.iter().any(|p| p.context == context && p.season.is_none_or(|s| s == season)) {
                    issues.push(format!("{}: no {} profile for {}", files::PROFILES, context.as_str(), season.as_str()));
                }
            }
        }
        for scheme in ChargingScheme::ALL {
            if !profiles.iter().any(|p| p.context == ProfileContext::Charging(scheme)) {
                issues.push(format!("{}: no {} charging profile", files::PROFILES, scheme.as_str()));
            }
        }
    }
    if let Some(ev) = &ev_params {
        for segment in Segment::ALL {
            if !ev.iter().any(|r| r.segment == segment) {
                issues.push(format!("{}: no parameters for {}", files::EV_PARAMS, segment.as_str()));
            }
        }
    }

    let ok = fs.iter().all(|f| f.ok) && issues.is_empty();
    ValidationReport { ok, files: fs, demand_coverage: coverage, issues }
}
