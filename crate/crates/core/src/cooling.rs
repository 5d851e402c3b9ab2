//! Air-conditioning demand from AC market sales, climate scaling, sector and
//! state splits, and hourly shaping from surveyed profiles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{model_days, DayType, Season, SeasonCalendar};
use crate::ingest::{AcMarketRow, ProfileContext, SampleProfile, SectorRow};

#[derive(Debug, Error)]
pub enum CoolingError {
    #[error("no AC market data covering {year} for the {scenario} scenario")]
    MissingMarketYear { year: i32, scenario: CoolingScenario },
    #[error("state shares sum to {sum}, expected 1")]
    ShareSumViolation { sum: f64 },
    #[error("no {context} profile for {season} {daytype} (income tier {income:?})")]
    MissingProfile { context: &'static str, season: &'static str, daytype: &'static str, income: Option<u8> },
    #[error("no sector history for state {0}")]
    MissingState(String),
    #[error("invalid cooling parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoolingScenario {
    Baseline,
    Efficient,
}

impl CoolingScenario {
    pub const ALL: [CoolingScenario; 2] = [CoolingScenario::Baseline, CoolingScenario::Efficient];

    pub fn as_str(self) -> &'static str {
        match self {
            CoolingScenario::Baseline => "baseline",
            CoolingScenario::Efficient => "efficient",
        }
    }
}

impl fmt::Display for CoolingScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoolingScenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(CoolingScenario::Baseline),
            "efficient" => Ok(CoolingScenario::Efficient),
            other => Err(format!("unknown cooling scenario `{other}`")),
        }
    }
}

/// One year of the AC market, interpolated where the table has gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcMarketYear {
    pub year: i32,
    pub scenario: CoolingScenario,
    pub units_sold: f64,
    pub unit_kwh: f64,
    pub stock: f64,
    /// Annual consumption of the whole stock, GWh.
    pub energy_gwh: f64,
}

/// Yearly AC market per scenario. Every cohort sold stays in the stock and
/// consumes its sale-year unit energy.
#[derive(Debug, Clone)]
pub struct AcMarket {
    years: BTreeMap<CoolingScenario, Vec<AcMarketYear>>,
}

impl AcMarket {
    pub fn from_rows(rows: &[AcMarketRow]) -> Self {
        let mut by: BTreeMap<CoolingScenario, Vec<&AcMarketRow>> = BTreeMap::new();
        for r in rows {
            by.entry(r.scenario).or_default().push(r);
        }
        let mut years = BTreeMap::new();
        for (scenario, mut rs) in by {
            rs.sort_by_key(|r| r.year);
            let mut out: Vec<AcMarketYear> = Vec::new();
            let (mut stock, mut energy) = (0.0, 0.0);
            for w in 0..rs.len() {
                let r0 = rs[w];
                let next = rs.get(w + 1);
                let last_year = next.map_or(r0.year, |n| n.year - 1);
                for y in r0.year..=last_year {
                    let (sold, kwh) = match next {
                        Some(n) => {
                            let t = f64::from(y - r0.year) / f64::from(n.year - r0.year);
                            (r0.units_sold + t * (n.units_sold - r0.units_sold), r0.unit_kwh_year + t * (n.unit_kwh_year - r0.unit_kwh_year))
                        }
                        None => (r0.units_sold, r0.unit_kwh_year),
                    };
                    stock += sold;
                    energy += sold * kwh / 1e6;
                    out.push(AcMarketYear { year: y, scenario, units_sold: sold, unit_kwh: kwh, stock, energy_gwh: energy });
                }
            }
            years.insert(scenario, out);
        }
        AcMarket { years }
    }

    pub fn year(&self, year: i32, scenario: CoolingScenario) -> Result<&AcMarketYear, CoolingError> {
        let ys = self.years.get(&scenario).ok_or(CoolingError::MissingMarketYear { year, scenario })?;
        let first = ys.first().ok_or(CoolingError::MissingMarketYear { year, scenario })?.year;
        usize::try_from(year - first)
            .ok()
            .and_then(|i| ys.get(i))
            .ok_or(CoolingError::MissingMarketYear { year, scenario })
    }

    pub fn years(&self, scenario: CoolingScenario) -> &[AcMarketYear] {
        self.years.get(&scenario).map_or(&[], Vec::as_slice)
    }
}

/// National AC consumption in GWh before climate scaling.
pub fn national_cooling_energy(market: &AcMarket, year: i32, scenario: CoolingScenario) -> Result<f64, CoolingError> {
    Ok(market.year(year, scenario)?.energy_gwh)
}

/// Linear growth of cooling degree days from a base year to a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CddScaler {
    pub base_year: i32,
    pub horizon_year: i32,
    pub uplift: f64,
}

impl Default for CddScaler {
    fn default() -> Self {
        CddScaler { base_year: 2018, horizon_year: 2050, uplift: 0.5 }
    }
}

impl CddScaler {
    pub fn multiplier(&self, year: i32) -> f64 {
        let t = f64::from(year - self.base_year) / f64::from(self.horizon_year - self.base_year);
        (1.0 + self.uplift * t).clamp(1.0, 1.0 + self.uplift)
    }
}

pub fn cdd_multiplier(year: i32) -> f64 {
    CddScaler::default().multiplier(year)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceFactors {
    pub weekday: f64,
    pub weekend: f64,
}

impl Default for CoincidenceFactors {
    fn default() -> Self {
        CoincidenceFactors { weekday: 0.7, weekend: 0.5 }
    }
}

impl CoincidenceFactors {
    pub fn new(weekday: f64, weekend: f64) -> Result<Self, CoolingError> {
        let ok = |f: f64| f > 0.0 && f <= 1.0;
        if !ok(weekday) || !ok(weekend) {
            return Err(CoolingError::Invalid(format!("coincidence factors must be in (0, 1], got {weekday} and {weekend}")));
        }
        Ok(CoincidenceFactors { weekday, weekend })
    }

    pub fn of(&self, daytype: DayType) -> f64 {
        match daytype {
            DayType::Weekday => self.weekday,
            DayType::Weekend => self.weekend,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingStateYear {
    pub state: String,
    pub year: i32,
    pub scenario: CoolingScenario,
    pub residential_gwh: f64,
    pub commercial_gwh: f64,
}

/// Prorate national cooling energy to states and split each state into
/// residential and commercial use by its commercial-to-residential ratio.
pub fn split_states(
    national_gwh: f64,
    shares: &[(String, f64)],
    com_res_ratio: &BTreeMap<String, f64>,
    year: i32,
    scenario: CoolingScenario,
) -> Result<Vec<CoolingStateYear>, CoolingError> {
    let sum: f64 = shares.iter().map(|s| s.1).sum();
    if (sum - 1.0).abs() > 1e-9 || shares.iter().any(|s| s.1 < 0.0) {
        return Err(CoolingError::ShareSumViolation { sum });
    }
    shares
        .iter()
        .map(|(state, share)| {
            let r = *com_res_ratio.get(state).ok_or_else(|| CoolingError::MissingState(state.clone()))?;
            let total = national_gwh * share;
            Ok(CoolingStateYear {
                state: state.clone(),
                year,
                scenario,
                residential_gwh: total / (1.0 + r),
                commercial_gwh: r * total / (1.0 + r),
            })
        })
        .collect()
}

/// Commercial-to-residential ratio of a state in `year`, extrapolated from
/// the linear trend of its sector history.
pub fn sector_ratio(rows: &[SectorRow], state: &str, year: i32) -> Result<f64, CoolingError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.state == state && r.residential_mwh > 0.0)
        .map(|r| (f64::from(r.year), r.commercial_mwh / r.residential_mwh))
        .collect();
    if pts.is_empty() {
        return Err(CoolingError::MissingState(state.into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx } else { 0.0 };
    Ok((my + slope * (f64::from(year) - mx)).clamp(0.05, 20.0))
}

/// Weights over `tiers` income tiers for a state at relative income rank
/// `rank` (0 poorest, 1 richest), interpolating between adjacent tiers.
pub fn income_weights(rank: f64, tiers: usize) -> Vec<f64> {
    let mut w = vec![0.0; tiers];
    if tiers == 0 {
        return w;
    }
    if tiers == 1 {
        w[0] = 1.0;
        return w;
    }
    let x = rank.clamp(0.0, 1.0) * (tiers - 1) as f64;
    let lo = (x.floor() as usize).min(tiers - 2);
    let t = x - lo as f64;
    w[lo] = 1.0 - t;
    w[lo + 1] = t;
    w
}

/// Rank in [0, 1] of each entry by value, lowest first.
pub fn income_ranks(values: &[(String, f64)]) -> BTreeMap<String, f64> {
    let mut sorted: Vec<&(String, f64)> = values.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let denom = (sorted.len().max(2) - 1) as f64;
    sorted.iter().enumerate().map(|(i, (s, _))| (s.clone(), i as f64 / denom)).collect()
}

/// Circular convolution of `p` with a centered `kernel`.
pub fn circular_convolve(p: &[f64; 24], kernel: &[f64]) -> [f64; 24] {
    let half = kernel.len() / 2;
    std::array::from_fn(|h| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, w)| w * p[(h + 24 + half - k) % 24])
            .sum()
    })
}

fn find_profile(
    profiles: &[SampleProfile],
    context: ProfileContext,
    season: Season,
    daytype: DayType,
    income: Option<u8>,
) -> Option<&SampleProfile> {
    profiles
        .iter()
        .filter(|p| {
            p.context == context
                && p.season.is_none_or(|s| s == season)
                && p.daytype.is_none_or(|d| d == daytype)
                && (p.income.is_none() || p.income == income)
        })
        .max_by_key(|p| {
            (p.income.is_some() as u8) * 4 + (p.season.is_some() as u8) * 2 + p.daytype.is_some() as u8
        })
}

/// Income-weighted, smoothed and coincidence-adjusted daily profile.
///
/// The coincidence factor blends the profile toward a flat day, which
/// lowers the aggregate peak. The result sums to 1.
pub fn build_cooling_profile(
    profiles: &[SampleProfile],
    context: ProfileContext,
    income: &[f64],
    season: Season,
    daytype: DayType,
    kernel: &[f64],
    factor: f64,
) -> Result<[f64; 24], CoolingError> {
    let missing = |tier| CoolingError::MissingProfile {
        context: context.as_str(),
        season: season.as_str(),
        daytype: daytype.as_str(),
        income: tier,
    };
    let mut mix = [0.0; 24];
    if income.is_empty() {
        mix = find_profile(profiles, context, season, daytype, None).ok_or_else(|| missing(None))?.values;
    } else {
        for (tier, &w) in income.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let p = find_profile(profiles, context, season, daytype, Some(tier as u8)).ok_or_else(|| missing(Some(tier as u8)))?;
            for (m, v) in mix.iter_mut().zip(&p.values) {
                *m += w * v;
            }
        }
    }
    let smooth = circular_convolve(&mix, kernel);
    let blended = smooth.map(|v| factor * v + (1.0 - factor) / 24.0);
    let sum: f64 = blended.iter().sum();
    if !(sum > 0.0) {
        return Err(missing(None));
    }
    Ok(blended.map(|v| v / sum))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoolingConfig {
    pub seasons: SeasonCalendar,
    pub summer_weight: f64,
    pub winter_weight: f64,
    pub coincidence: CoincidenceFactors,
    pub kernel: Vec<f64>,
    pub cdd: CddScaler,
    pub apply_cdd: bool,
}

impl Default for CoolingConfig {
    fn default() -> Self {
        CoolingConfig {
            seasons: SeasonCalendar::default(),
            summer_weight: 1.0,
            winter_weight: 0.3,
            coincidence: CoincidenceFactors::default(),
            kernel: vec![0.25, 0.5, 0.25],
            cdd: CddScaler::default(),
            apply_cdd: true,
        }
    }
}

impl CoolingConfig {
    pub fn climate_multiplier(&self, year: i32) -> f64 {
        if self.apply_cdd {
            self.cdd.multiplier(year)
        } else {
            1.0
        }
    }

    fn season_weight(&self, season: Season) -> f64 {
        match season {
            Season::Summer => self.summer_weight,
            Season::Winter => self.winter_weight,
        }
    }
}

/// Daily profiles for one sector and state, by season and day type.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingProfiles {
    /// `[season][daytype]`, summer first, weekday first.
    pub shapes: [[[f64; 24]; 2]; 2],
}

impl CoolingProfiles {
    pub fn build(
        profiles: &[SampleProfile],
        context: ProfileContext,
        income: &[f64],
        config: &CoolingConfig,
    ) -> Result<Self, CoolingError> {
        let mut shapes = [[[0.0; 24]; 2]; 2];
        for (si, season) in [Season::Summer, Season::Winter].into_iter().enumerate() {
            for daytype in [DayType::Weekday, DayType::Weekend] {
                shapes[si][daytype.index()] = build_cooling_profile(
                    profiles,
                    context,
                    income,
                    season,
                    daytype,
                    &config.kernel,
                    config.coincidence.of(daytype),
                )?;
            }
        }
        Ok(CoolingProfiles { shapes })
    }

    fn shape(&self, season: Season, daytype: DayType) -> &[f64; 24] {
        let si = match season {
            Season::Summer => 0,
            Season::Winter => 1,
        };
        &self.shapes[si][daytype.index()]
    }
}

/// Spread `annual_gwh` over the hours of `year`: days by season weight,
/// hours by profile. Values are MW.
pub fn cooling_hourly(annual_gwh: f64, year: i32, profiles: &CoolingProfiles, config: &CoolingConfig) -> Vec<f64> {
    let days = model_days(year);
    let weights: Vec<f64> = days.iter().map(|d| config.season_weight(config.seasons.season(*d))).collect();
    let total_weight: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(days.len() * 24);
    for (d, w) in days.iter().zip(&weights) {
        let day_mwh = if total_weight > 0.0 { annual_gwh * 1000.0 * w / total_weight } else { 0.0 };
        let shape = profiles.shape(config.seasons.season(*d), DayType::of(*d));
        out.extend(shape.iter().map(|s| day_mwh * s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(year: i32, scenario: CoolingScenario, units: f64, kwh: f64) -> AcMarketRow {
        AcMarketRow { year, scenario, units_sold: units, unit_kwh_year: kwh }
    }

    #[test]
    fn cdd_reference_points() {
        assert_eq!(cdd_multiplier(2018), 1.0);
        assert_eq!(cdd_multiplier(2034), 1.25);
        assert_eq!(cdd_multiplier(2050), 1.5);
        assert_eq!(cdd_multiplier(2060), 1.5);
        assert!((2018..2050).all(|y| cdd_multiplier(y) <= cdd_multiplier(y + 1)));
    }

    #[test]
    fn market_cohorts_accumulate_with_interpolation() {
        let market = AcMarket::from_rows(&[
            row(2010, CoolingScenario::Baseline, 1000.0, 1000.0),
            row(2012, CoolingScenario::Baseline, 3000.0, 2000.0),
        ]);
        let y2011 = market.year(2011, CoolingScenario::Baseline).unwrap();
        assert_eq!(y2011.units_sold, 2000.0);
        assert_eq!(y2011.stock, 3000.0);
        let e = national_cooling_energy(&market, 2012, CoolingScenario::Baseline).unwrap();
        assert!((e - (1000.0 * 1000.0 + 2000.0 * 1500.0 + 3000.0 * 2000.0) / 1e6).abs() < 1e-12);
        assert!(market.year(2013, CoolingScenario::Baseline).is_err());
        assert!(market.year(2011, CoolingScenario::Efficient).is_err());
        let zero = AcMarket::from_rows(&[row(2015, CoolingScenario::Baseline, 0.0, 1500.0)]);
        assert_eq!(national_cooling_energy(&zero, 2015, CoolingScenario::Baseline).unwrap(), 0.0);
    }

    #[test]
    fn state_split_ratio_algebra() {
        let ratios: BTreeMap<String, f64> = [("A".to_string(), 0.6), ("B".to_string(), 1.0)].into();
        let one = split_states(100.0, &[("A".into(), 1.0)], &ratios, 2030, CoolingScenario::Baseline).unwrap();
        assert!((one[0].residential_gwh - 62.5).abs() < 1e-12);
        assert!((one[0].commercial_gwh - 37.5).abs() < 1e-12);
        let two =
            split_states(90.0, &[("A".into(), 0.3), ("B".into(), 0.7)], &ratios, 2030, CoolingScenario::Baseline).unwrap();
        assert_eq!(two[1].residential_gwh, two[1].commercial_gwh);
        let total: f64 = two.iter().map(|s| s.residential_gwh + s.commercial_gwh).sum();
        assert!((total - 90.0).abs() < 1e-9 * 90.0);
        assert!(matches!(
            split_states(90.0, &[("A".into(), 0.3)], &ratios, 2030, CoolingScenario::Baseline),
            Err(CoolingError::ShareSumViolation { .. })
        ));
    }

    fn profile(context: ProfileContext, income: Option<u8>, values: [f64; 24]) -> SampleProfile {
        SampleProfile::normalized(context, None, income, None, values).unwrap()
    }

    #[test]
    fn profile_identity_and_convexity() {
        let base: [f64; 24] = std::array::from_fn(|h| 1.0 + (h as f64 - 14.0).abs().recip().min(3.0));
        let p = profile(ProfileContext::Residential, None, base);
        let out = build_cooling_profile(std::slice::from_ref(&p), ProfileContext::Residential, &[], Season::Summer, DayType::Weekday, &[1.0], 1.0)
            .unwrap();
        assert!(out.iter().zip(&p.values).all(|(a, b)| (a - b).abs() < 1e-15));

        let tiers = vec![
            profile(ProfileContext::Residential, Some(0), base),
            profile(ProfileContext::Residential, Some(1), base),
        ];
        let out = build_cooling_profile(&tiers, ProfileContext::Residential, &[0.3, 0.7], Season::Summer, DayType::Weekday, &[1.0], 1.0)
            .unwrap();
        assert!(out.iter().zip(&p.values).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(matches!(
            build_cooling_profile(&tiers, ProfileContext::Commercial, &[], Season::Summer, DayType::Weekday, &[1.0], 1.0),
            Err(CoolingError::MissingProfile { .. })
        ));
    }

    #[test]
    fn smoothing_lowers_the_peak() {
        let mut v = [1.0; 24];
        v[20] = 5.0;
        let p = profile(ProfileContext::Residential, None, v);
        let out =
            build_cooling_profile(std::slice::from_ref(&p), ProfileContext::Residential, &[], Season::Summer, DayType::Weekday, &[0.25, 0.5, 0.25], 1.0)
                .unwrap();
        assert!(out[20] < p.values[20]);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hourly_conserves_energy_and_favours_summer() {
        let mut v = [1.0; 24];
        v[14] = 3.0;
        let profiles = vec![profile(ProfileContext::Commercial, None, v)];
        let config = CoolingConfig::default();
        let shapes = CoolingProfiles::build(&profiles, ProfileContext::Commercial, &[], &config).unwrap();
        let trace = cooling_hourly(500.0, 2030, &shapes, &config);
        assert_eq!(trace.len(), 8760);
        assert!((trace.iter().sum::<f64>() / 1000.0 - 500.0).abs() < 1e-6 * 500.0);
        let jan: f64 = trace[..31 * 24].iter().sum::<f64>() / 31.0;
        let jun: f64 = trace[151 * 24..181 * 24].iter().sum::<f64>() / 30.0;
        assert!(jun > jan);
        assert!(cooling_hourly(0.0, 2030, &shapes, &config).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn income_weights_interpolate() {
        assert_eq!(income_weights(0.0, 3), vec![1.0, 0.0, 0.0]);
        assert_eq!(income_weights(1.0, 3), vec![0.0, 0.0, 1.0]);
        assert_eq!(income_weights(0.75, 3), vec![0.0, 0.5, 0.5]);
        let ranks = income_ranks(&[("A".into(), 3.0), ("B".into(), 1.0), ("C".into(), 2.0)]);
        assert_eq!(ranks["B"], 0.0);
        assert_eq!(ranks["A"], 1.0);
    }
}
