//! GDP growth curves, scenario projections and state prorating shares.
//!
//! Slow growth follows a Gompertz fit to history, rapid growth an exponential
//! fit, and stable growth an external decade-anchor table. All three are
//! re-anchored to a common value in the anchor year so that the scenarios
//! differ only in their growth from that point on.

mod curve;
mod lm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{fit_exponential, fit_gompertz, CurveForm, GrowthCurve};

use crate::ingest::{GdpRow, PopulationRow, Region, StableAnchorRow, StateMap};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("curve fit is singular: {0}")]
    SingularFit(String),
    #[error("curve fits need positive values, got {0}")]
    NonPositiveInput(f64),
    #[error("need at least {required} points, got {found}")]
    InsufficientPoints { found: usize, required: usize },
    #[error("x has {x} points but y has {y}")]
    LengthMismatch { x: usize, y: usize },
}

#[derive(Debug, Error)]
pub enum GdpError {
    #[error("the stable scenario needs a stable-growth anchor table")]
    MissingStableTable,
    #[error("stable anchor table: {0}")]
    BadStableTable(String),
    #[error("no {what} for state {state} in {year}")]
    MissingState { state: String, year: i32, what: &'static str },
    #[error("degenerate shares for {group} in {year}: {reason}")]
    Degenerate { group: String, year: i32, reason: String },
    #[error("no GDP history")]
    NoHistory,
    #[error("year {0} is outside the projection")]
    YearOutOfRange(i32),
    #[error("national {scenario} fit failed: {source}")]
    NationalFit {
        scenario: GdpScenario,
        #[source]
        source: FitError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GdpScenario {
    Slow,
    Stable,
    Rapid,
}

impl GdpScenario {
    pub const ALL: [GdpScenario; 3] = [GdpScenario::Slow, GdpScenario::Stable, GdpScenario::Rapid];

    pub fn as_str(self) -> &'static str {
        match self {
            GdpScenario::Slow => "slow",
            GdpScenario::Stable => "stable",
            GdpScenario::Rapid => "rapid",
        }
    }
}

impl fmt::Display for GdpScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GdpScenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slow" => Ok(GdpScenario::Slow),
            "stable" => Ok(GdpScenario::Stable),
            "rapid" => Ok(GdpScenario::Rapid),
            other => Err(format!("unknown GDP scenario `{other}`")),
        }
    }
}

/// Decade anchors of the stable scenario with constant-growth interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct StableTable {
    anchors: Vec<(i32, f64)>,
}

impl StableTable {
    pub fn new(mut anchors: Vec<(i32, f64)>) -> Result<Self, GdpError> {
        anchors.sort_by_key(|a| a.0);
        if anchors.len() < 2 {
            return Err(GdpError::BadStableTable("need at least two anchor years".into()));
        }
        if anchors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(GdpError::BadStableTable("duplicate anchor year".into()));
        }
        if anchors.iter().any(|a| !(a.1 > 0.0)) {
            return Err(GdpError::BadStableTable("anchor values must be positive".into()));
        }
        Ok(StableTable { anchors })
    }

    pub fn from_rows(rows: &[StableAnchorRow]) -> Result<Self, GdpError> {
        Self::new(rows.iter().map(|r| (r.year, r.gdp_usd)).collect())
    }

    pub fn first_year(&self) -> i32 {
        self.anchors[0].0
    }

    pub fn last_year(&self) -> i32 {
        self.anchors[self.anchors.len() - 1].0
    }

    /// Value at `year`: exact on anchors, geometric in between.
    pub fn value(&self, year: i32) -> Option<f64> {
        let i = self.anchors.iter().position(|a| a.0 >= year)?;
        let (y1, v1) = self.anchors[i];
        if y1 == year {
            return Some(v1);
        }
        if i == 0 {
            return None;
        }
        let (y0, v0) = self.anchors[i - 1];
        let t = f64::from(year - y0) / f64::from(y1 - y0);
        Some(v0 * (v1 / v0).powf(t))
    }
}

/// Annual GDP for one geography under one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdpPath {
    pub geography: String,
    pub scenario: GdpScenario,
    pub values: BTreeMap<i32, f64>,
}

impl GdpPath {
    pub fn get(&self, year: i32) -> Option<f64> {
        self.values.get(&year).copied()
    }

    pub fn value(&self, year: i32) -> Result<f64, GdpError> {
        self.get(year).ok_or(GdpError::YearOutOfRange(year))
    }

    /// Compound annual growth between two years.
    pub fn cagr(&self, from: i32, to: i32) -> Option<f64> {
        let a = self.get(from)?;
        let b = self.get(to)?;
        Some((b / a).powf(1.0 / f64::from(to - from)) - 1.0)
    }
}

/// What drives each scenario's growth.
#[derive(Debug, Clone)]
pub struct ScenarioDrivers {
    pub slow: Option<GrowthCurve>,
    pub rapid: Option<GrowthCurve>,
    pub stable: Option<StableTable>,
}

/// Raw (un-anchored) scenario values for `years`.
pub fn project_gdp(
    drivers: &ScenarioDrivers,
    scenario: GdpScenario,
    years: std::ops::RangeInclusive<i32>,
) -> Result<BTreeMap<i32, f64>, GdpError> {
    let mut out = BTreeMap::new();
    for year in years {
        let v = match scenario {
            GdpScenario::Slow => drivers.slow.as_ref().map(|c| c.eval(f64::from(year))),
            GdpScenario::Rapid => drivers.rapid.as_ref().map(|c| c.eval(f64::from(year))),
            GdpScenario::Stable => {
                let table = drivers.stable.as_ref().ok_or(GdpError::MissingStableTable)?;
                Some(table.value(year).ok_or(GdpError::YearOutOfRange(year))?)
            }
        };
        out.insert(year, v.ok_or(GdpError::YearOutOfRange(year))?);
    }
    Ok(out)
}

/// Lookup of state population by year.
#[derive(Debug, Clone, Default)]
pub struct Population {
    values: BTreeMap<(String, i32), f64>,
}

impl Population {
    pub fn from_rows(rows: &[PopulationRow]) -> Self {
        Population { values: rows.iter().map(|r| ((r.state.clone(), r.year), r.pop)).collect() }
    }

    pub fn get(&self, state: &str, year: i32) -> Option<f64> {
        self.values.get(&(state.to_string(), year)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateShare {
    pub state: String,
    pub year: i32,
    pub share: f64,
}

/// Shares of `members` in their group total from GDP per capita times
/// population. Fails when a member has no data or the weights vanish.
pub fn group_shares(
    group: &str,
    members: &[&str],
    gdp: impl Fn(&str) -> Option<f64>,
    population: &Population,
    year: i32,
) -> Result<Vec<StateShare>, GdpError> {
    let mut weights = Vec::with_capacity(members.len());
    for &state in members {
        let g = gdp(state).ok_or_else(|| GdpError::MissingState { state: state.into(), year, what: "GDP" })?;
        let p = population
            .get(state, year)
            .ok_or_else(|| GdpError::MissingState { state: state.into(), year, what: "population" })?;
        weights.push((g, p));
    }
    if weights.is_empty() || weights.iter().all(|(_, p)| *p <= 0.0) {
        return Err(GdpError::Degenerate { group: group.into(), year, reason: "no population".into() });
    }
    let weighted: Vec<f64> = weights
        .iter()
        .map(|&(g, p)| if p > 0.0 { (g / p) * p } else { 0.0 })
        .collect();
    let total: f64 = weighted.iter().sum();
    if !(total > 0.0) {
        return Err(GdpError::Degenerate { group: group.into(), year, reason: "zero total GDP".into() });
    }
    Ok(members
        .iter()
        .zip(weighted)
        .map(|(s, w)| StateShare { state: s.to_string(), year, share: w / total })
        .collect())
}

/// Prorating shares of every state within its region for `year`.
pub fn state_shares(
    paths: &BTreeMap<String, GdpPath>,
    population: &Population,
    states: &StateMap,
    year: i32,
) -> Result<Vec<StateShare>, GdpError> {
    let mut out = Vec::new();
    for region in Region::ALL {
        let members = states.states_in(region);
        if members.is_empty() {
            continue;
        }
        out.extend(group_shares(region.code(), &members, |s| paths.get(s).and_then(|p| p.get(year)), population, year)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdpConfig {
    pub anchor_year: i32,
    pub end_year: i32,
}

impl Default for GdpConfig {
    fn default() -> Self {
        GdpConfig { anchor_year: 2020, end_year: 2050 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateFits {
    pub slow: Option<GrowthCurve>,
    pub rapid: Option<GrowthCurve>,
}

pub const NATIONAL: &str = "IN";

/// Calibrated GDP paths for every state, region and the nation under every
/// scenario.
#[derive(Debug, Clone)]
pub struct GdpProjections {
    pub config: GdpConfig,
    pub national_slow: GrowthCurve,
    pub national_rapid: GrowthCurve,
    pub state_fits: BTreeMap<String, StateFits>,
    pub anchor_value: f64,
    pub last_history_year: i32,
    paths: BTreeMap<GdpScenario, BTreeMap<String, GdpPath>>,
    national: BTreeMap<GdpScenario, GdpPath>,
    regions: BTreeMap<GdpScenario, BTreeMap<Region, GdpPath>>,
}

impl GdpProjections {
    pub fn build(
        rows: &[GdpRow],
        stable: Option<&StableTable>,
        states: &StateMap,
        config: GdpConfig,
    ) -> Result<Self, GdpError> {
        let mut history: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
        for r in rows.iter().filter(|r| states.region_of(&r.state).is_some() && r.year < config.anchor_year) {
            history.entry(r.state.clone()).or_default().insert(r.year, r.gdp_usd);
        }
        let state_names: Vec<String> = states.states().map(|(s, _)| s.to_string()).collect();
        for s in &state_names {
            if !history.contains_key(s) {
                return Err(GdpError::MissingState { state: s.clone(), year: config.anchor_year - 1, what: "GDP history" });
            }
        }
        // national history over years every state reports
        let mut national_hist: BTreeMap<i32, f64> = BTreeMap::new();
        let years: Vec<i32> = history.values().next().ok_or(GdpError::NoHistory)?.keys().copied().collect();
        for y in years {
            if history.values().all(|h| h.contains_key(&y)) {
                national_hist.insert(y, history.values().map(|h| h[&y]).sum());
            }
        }
        let last = *national_hist.keys().next_back().ok_or(GdpError::NoHistory)?;
        let xs: Vec<f64> = national_hist.keys().map(|y| f64::from(*y)).collect();
        let ys: Vec<f64> = national_hist.values().copied().collect();
        let national_slow =
            fit_gompertz(&xs, &ys).map_err(|source| GdpError::NationalFit { scenario: GdpScenario::Slow, source })?;
        let national_rapid =
            fit_exponential(&xs, &ys).map_err(|source| GdpError::NationalFit { scenario: GdpScenario::Rapid, source })?;

        let anchor_year = config.anchor_year;
        let anchor_value = match stable {
            Some(t) => t.value(anchor_year).ok_or(GdpError::YearOutOfRange(anchor_year))?,
            None => national_rapid.eval(f64::from(anchor_year)),
        };
        let projected: Vec<i32> = (anchor_year..=config.end_year).collect();
        let anchored = |curve: &GrowthCurve| -> BTreeMap<i32, f64> {
            let base = curve.eval(f64::from(anchor_year));
            projected.iter().map(|&y| (y, curve.eval(f64::from(y)) * anchor_value / base)).collect()
        };
        let mut national_proj: BTreeMap<GdpScenario, BTreeMap<i32, f64>> = BTreeMap::new();
        national_proj.insert(GdpScenario::Slow, anchored(&national_slow));
        national_proj.insert(GdpScenario::Rapid, anchored(&national_rapid));
        if let Some(t) = stable {
            let base = t.value(anchor_year).ok_or(GdpError::YearOutOfRange(anchor_year))?;
            let mut m = BTreeMap::new();
            for &y in &projected {
                m.insert(y, t.value(y).ok_or(GdpError::YearOutOfRange(y))? * anchor_value / base);
            }
            national_proj.insert(GdpScenario::Stable, m);
        }

        // per-state curves, anchored to the state's last observed share
        let national_last = national_hist[&last];
        let mut state_fits = BTreeMap::new();
        let mut raw: BTreeMap<GdpScenario, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
        for s in &state_names {
            let h = &history[s];
            let share_last = h.get(&last).copied().unwrap_or(0.0) / national_last;
            let xs: Vec<f64> = h.keys().map(|y| f64::from(*y)).collect();
            let ys: Vec<f64> = h.values().copied().collect();
            let slow = fit_gompertz(&xs, &ys)
                .map_err(|e| warn!("state {s}: Gompertz fit failed ({e}); keeping its last share"))
                .ok();
            let rapid = fit_exponential(&xs, &ys)
                .map_err(|e| warn!("state {s}: exponential fit failed ({e}); keeping its last share"))
                .ok();
            for (scenario, curve) in [(GdpScenario::Slow, slow), (GdpScenario::Rapid, rapid)] {
                let weights: Vec<f64> = match curve {
                    Some(c) => {
                        let base = c.eval(f64::from(anchor_year));
                        projected.iter().map(|&y| share_last * c.eval(f64::from(y)) / base).collect()
                    }
                    None => vec![share_last; projected.len()],
                };
                raw.entry(scenario).or_default().insert(s.clone(), weights);
            }
            state_fits.insert(s.clone(), StateFits { slow, rapid });
        }

        let mut paths: BTreeMap<GdpScenario, BTreeMap<String, GdpPath>> = BTreeMap::new();
        for scenario in [GdpScenario::Slow, GdpScenario::Rapid] {
            let nat = &national_proj[&scenario];
            let weights = &raw[&scenario];
            let mut m = BTreeMap::new();
            for s in &state_names {
                let mut values: BTreeMap<i32, f64> = history[s].clone();
                for (i, &y) in projected.iter().enumerate() {
                    let total: f64 = weights.values().map(|w| w[i]).sum();
                    values.insert(y, nat[&y] * weights[s][i] / total);
                }
                m.insert(s.clone(), GdpPath { geography: s.clone(), scenario, values });
            }
            paths.insert(scenario, m);
        }
        if let Some(stable_nat) = national_proj.get(&GdpScenario::Stable) {
            // each state's stable path sits at the same fraction between its slow and rapid paths
            let mut m = BTreeMap::new();
            let theta: BTreeMap<i32, f64> = projected
                .iter()
                .map(|&y| {
                    let lo = national_proj[&GdpScenario::Slow][&y];
                    let hi = national_proj[&GdpScenario::Rapid][&y];
                    let t = if hi > lo { (stable_nat[&y] - lo) / (hi - lo) } else { 0.5 };
                    if !(0.0..=1.0).contains(&t) {
                        warn!("stable GDP in {y} lies outside the slow/rapid band (position {t:.3})");
                    }
                    (y, t)
                })
                .collect();
            for s in &state_names {
                let mut values = history[s].clone();
                for &y in &projected {
                    let lo = paths[&GdpScenario::Slow][s].values[&y];
                    let hi = paths[&GdpScenario::Rapid][s].values[&y];
                    values.insert(y, lo + theta[&y] * (hi - lo));
                }
                m.insert(s.clone(), GdpPath { geography: s.clone(), scenario: GdpScenario::Stable, values });
            }
            paths.insert(GdpScenario::Stable, m);
        }

        let mut national = BTreeMap::new();
        let mut regions = BTreeMap::new();
        for (scenario, by_state) in &paths {
            let sum_paths = |geo: &str, members: Vec<&GdpPath>| {
                let mut values = BTreeMap::new();
                for y in members[0].values.keys() {
                    values.insert(*y, members.iter().map(|p| p.values[y]).sum());
                }
                GdpPath { geography: geo.into(), scenario: *scenario, values }
            };
            national.insert(*scenario, sum_paths(NATIONAL, by_state.values().collect()));
            let mut rm = BTreeMap::new();
            for region in Region::ALL {
                let members: Vec<&GdpPath> = states.states_in(region).iter().map(|s| &by_state[*s]).collect();
                if !members.is_empty() {
                    rm.insert(region, sum_paths(region.code(), members));
                }
            }
            regions.insert(*scenario, rm);
        }

        Ok(GdpProjections {
            config,
            national_slow,
            national_rapid,
            state_fits,
            anchor_value,
            last_history_year: last,
            paths,
            national,
            regions,
        })
    }

    fn scenario_paths(&self, scenario: GdpScenario) -> Result<&BTreeMap<String, GdpPath>, GdpError> {
        self.paths.get(&scenario).ok_or(GdpError::MissingStableTable)
    }

    pub fn state(&self, scenario: GdpScenario, state: &str) -> Result<&GdpPath, GdpError> {
        self.scenario_paths(scenario)?
            .get(state)
            .ok_or_else(|| GdpError::MissingState { state: state.into(), year: self.config.anchor_year, what: "GDP path" })
    }

    pub fn states(&self, scenario: GdpScenario) -> Result<&BTreeMap<String, GdpPath>, GdpError> {
        self.scenario_paths(scenario)
    }

    pub fn region(&self, scenario: GdpScenario, region: Region) -> Result<&GdpPath, GdpError> {
        self.regions
            .get(&scenario)
            .ok_or(GdpError::MissingStableTable)?
            .get(&region)
            .ok_or_else(|| GdpError::MissingState { state: region.to_string(), year: self.config.anchor_year, what: "states" })
    }

    pub fn national(&self, scenario: GdpScenario) -> Result<&GdpPath, GdpError> {
        self.national.get(&scenario).ok_or(GdpError::MissingStableTable)
    }

    pub fn scenarios(&self) -> impl Iterator<Item = GdpScenario> + '_ {
        self.paths.keys().copied()
    }

    /// Years in which the national paths are not ordered rapid ≥ stable ≥ slow.
    pub fn ordering_violations(&self) -> Vec<i32> {
        let (Ok(slow), Ok(rapid)) = (self.national(GdpScenario::Slow), self.national(GdpScenario::Rapid)) else {
            return Vec::new();
        };
        let stable = self.national(GdpScenario::Stable).ok();
        (self.config.anchor_year..=self.config.end_year)
            .filter(|y| {
                let lo = slow.values[y];
                let hi = rapid.values[y];
                let tol = 1e-9 * hi.abs();
                match stable {
                    Some(st) => hi + tol < st.values[y] || st.values[y] + tol < lo,
                    None => hi + tol < lo,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_table_interpolates_geometrically() {
        let t = StableTable::new(vec![(2020, 3.6e12), (2030, 7.2e12), (2050, 2.8e13)]).unwrap();
        assert_eq!(t.value(2020), Some(3.6e12));
        assert_eq!(t.value(2050), Some(2.8e13));
        let mid = t.value(2025).unwrap();
        assert!((mid - 3.6e12 * 2f64.sqrt()).abs() / mid < 1e-12);
        assert_eq!(t.value(2019), None);
        assert_eq!(t.value(2051), None);
    }

    #[test]
    fn rapid_projection_from_table_parameters() {
        let drivers = ScenarioDrivers { slow: None, rapid: Some(GrowthCurve::exponential(1e-64, 0.087, 0.0)), stable: None };
        let p = project_gdp(&drivers, GdpScenario::Rapid, 2020..=2050).unwrap();
        let expected_2020 = 1e-64 * (0.087f64 * 2020.0).exp();
        assert!((p[&2020] - expected_2020).abs() / expected_2020 < 1e-12);
        let cagr = (p[&2050] / p[&2020]).powf(1.0 / 30.0) - 1.0;
        assert!((cagr - (0.087f64.exp() - 1.0)).abs() < 1e-12);
        assert!((cagr - 0.095).abs() < 0.005);
        assert!(matches!(project_gdp(&drivers, GdpScenario::Stable, 2020..=2030), Err(GdpError::MissingStableTable)));
    }

    fn pop(entries: &[(&str, i32, f64)]) -> Population {
        Population::from_rows(
            &entries.iter().map(|(s, y, p)| PopulationRow { state: s.to_string(), year: *y, pop: *p }).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn shares_from_gdp_per_capita() {
        let population = pop(&[("A", 2030, 10.0), ("B", 2030, 10.0)]);
        let gdp = |s: &str| match s {
            "A" => Some(200.0),
            "B" => Some(100.0),
            _ => None,
        };
        let shares = group_shares("R", &["A", "B"], gdp, &population, 2030).unwrap();
        assert!((shares[0].share - 2.0 / 3.0).abs() < 1e-15);
        assert!((shares[1].share - 1.0 / 3.0).abs() < 1e-15);
        let single = group_shares("R", &["A"], gdp, &population, 2030).unwrap();
        assert_eq!(single[0].share, 1.0);
    }

    #[test]
    fn zero_population_is_degenerate() {
        let population = Population::default();
        assert!(matches!(
            group_shares("R", &["A"], |_| Some(1.0), &population, 2030),
            Err(GdpError::MissingState { .. })
        ));
        let population = pop(&[("A", 2030, 0.0), ("B", 2030, 0.0)]);
        assert!(matches!(
            group_shares("R", &["A", "B"], |_| Some(1.0), &population, 2030),
            Err(GdpError::Degenerate { .. })
        ));
    }
}
