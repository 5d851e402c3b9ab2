//! Daily to hourly downscaling.
//!
//! Hours are sampled from month/day-type/hour pools of the 2015 reference
//! year, scaled by a weather factor and mapped affinely onto each day's
//! energy and peak targets.

use chrono::{Datelike, NaiveDate};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{DayType, REFERENCE_YEAR};
use crate::ingest::ReferenceLoadYear;
use crate::rng;

#[derive(Debug, Error)]
pub enum HourlyError {
    #[error("no reference samples for month {month}, {daytype} hour {hour}")]
    EmptyPool { month: u32, daytype: &'static str, hour: usize },
    #[error("peak {peak_mw} MW is below the mean load {mean_mw} MW on {date:?}")]
    InfeasibleDay { date: Option<NaiveDate>, peak_mw: f64, mean_mw: f64 },
    #[error("flat day shape cannot reach peak {peak_mw} MW above mean {mean_mw} MW")]
    FlatShape { peak_mw: f64, mean_mw: f64 },
    #[error("expected {expected} days, got {found}")]
    WrongDayCount { found: usize, expected: usize },
    #[error("reference temperature spread must be positive, got {0}")]
    BadTemperatureSpread(f64),
}

const POOL_COUNT: usize = 12 * 2 * 24;

fn pool_index(month: u32, daytype: DayType, hour: usize) -> usize {
    (month as usize - 1) * 48 + daytype.index() * 24 + hour
}

/// Normalized reference-year samples pooled by (month, day type, hour).
#[derive(Debug, Clone)]
pub struct ClusterSet {
    pools: Vec<Vec<f64>>,
}

impl ClusterSet {
    pub fn pool(&self, month: u32, daytype: DayType, hour: usize) -> &[f64] {
        &self.pools[pool_index(month, daytype, hour)]
    }

    pub fn len(&self) -> usize {
        self.pools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pools.is_empty()
    }
}

/// Pool every reference hour, divided by its day's mean load.
pub fn build_clusters(reference: &ReferenceLoadYear) -> Result<ClusterSet, HourlyError> {
    build_clusters_from(&reference.values)
}

/// Like [`build_clusters`] for a possibly truncated run of hourly values
/// starting on Jan 1 of the reference year.
pub fn build_clusters_from(values: &[f64]) -> Result<ClusterSet, HourlyError> {
    let start = NaiveDate::from_ymd_opt(REFERENCE_YEAR, 1, 1).unwrap();
    let mut pools = vec![Vec::new(); POOL_COUNT];
    for (d, day) in values.chunks_exact(24).enumerate() {
        let date = start + chrono::Days::new(d as u64);
        let mean = day.iter().sum::<f64>() / 24.0;
        let dt = DayType::of(date);
        for (h, v) in day.iter().enumerate() {
            pools[pool_index(date.month(), dt, h)].push(v / mean);
        }
    }
    for month in 1..=12 {
        for dt in [DayType::Weekday, DayType::Weekend] {
            for hour in 0..24 {
                if pools[pool_index(month, dt, hour)].is_empty() {
                    return Err(HourlyError::EmptyPool { month, daytype: dt.as_str(), hour });
                }
            }
        }
    }
    Ok(ClusterSet { pools })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeatherScaling {
    pub beta: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for WeatherScaling {
    fn default() -> Self {
        WeatherScaling { beta: 0.05, min: 0.9, max: 1.1 }
    }
}

pub fn weather_scale_factor(day_temp: f64, ref_temp: f64, ref_std: f64, scaling: WeatherScaling) -> f64 {
    (1.0 + scaling.beta * (day_temp - ref_temp) / ref_std).clamp(scaling.min, scaling.max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayShape {
    pub values: [f64; 24],
    pub month: u32,
    pub daytype: DayType,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedDay {
    pub values: [f64; 24],
    /// Some hours came out negative and were floored.
    pub floored: bool,
}

const REL_TOL: f64 = 1e-12;

/// Map `shape` affinely so the day sums to `energy` and peaks at `peak`.
pub fn fit_day(shape: &[f64; 24], energy: f64, peak: f64) -> Result<FittedDay, HourlyError> {
    let mean_target = energy / 24.0;
    // the peak hour alone cannot carry more than the whole day
    if peak < mean_target * (1.0 - REL_TOL) || peak > energy * (1.0 + REL_TOL) {
        return Err(HourlyError::InfeasibleDay { date: None, peak_mw: peak, mean_mw: mean_target });
    }
    let mean = shape.iter().sum::<f64>() / 24.0;
    let (imax, smax) = shape
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let spread = peak - mean_target;
    if spread <= REL_TOL * peak.abs() {
        return Ok(FittedDay { values: [mean_target; 24], floored: false });
    }
    if smax - mean <= REL_TOL * smax.abs() {
        return Err(HourlyError::FlatShape { peak_mw: peak, mean_mw: mean_target });
    }
    let a = spread / (smax - mean);
    let b = mean_target - a * mean;
    let mut values = shape.map(|s| a * s + b);
    values[imax] = peak;
    let floored = values.iter().any(|v| *v < 0.0);
    if floored {
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        let rest: f64 = values.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, v)| v).sum();
        let want = energy - peak;
        for (i, v) in values.iter_mut().enumerate() {
            if i != imax {
                *v = if rest > 0.0 { *v * want / rest } else { want / 23.0 };
            }
        }
    }
    Ok(FittedDay { values, floored })
}

/// Daily 2 m temperatures of the reference year, for weather scaling.
#[derive(Debug, Clone)]
pub struct ReferenceWeather {
    temps: Vec<(NaiveDate, f64)>,
    std: f64,
}

impl ReferenceWeather {
    pub fn new(temps: Vec<(NaiveDate, f64)>) -> Result<Self, HourlyError> {
        let n = temps.len().max(1) as f64;
        let mean = temps.iter().map(|t| t.1).sum::<f64>() / n;
        let std = (temps.iter().map(|t| (t.1 - mean).powi(2)).sum::<f64>() / n).sqrt();
        if !(std > 0.0) {
            return Err(HourlyError::BadTemperatureSpread(std));
        }
        Ok(ReferenceWeather { temps, std })
    }

    fn on(&self, month: u32, day: u32) -> Option<f64> {
        self.temps.iter().find(|(d, _)| d.month() == month && d.day() == day).map(|t| t.1)
    }

    pub fn std(&self) -> f64 {
        self.std
    }
}

/// Inputs for one synthesized year.
pub struct DayTargets<'a> {
    pub dates: &'a [NaiveDate],
    pub energy: &'a [f64],
    pub peak: &'a [f64],
    /// Regional mean 2 m temperature of each day, when weather scaling applies.
    pub temps: Option<&'a [f64]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DayDiagnostic {
    pub date: NaiveDate,
    pub target_peak: f64,
    pub achieved_peak: f64,
    pub target_energy: f64,
    pub achieved_energy: f64,
    pub weather_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourlyYear {
    pub geography: String,
    pub year: i32,
    pub component: String,
    pub values: Vec<f64>,
}

impl HourlyYear {
    pub fn zeros(geography: &str, year: i32, component: &str) -> Self {
        HourlyYear {
            geography: geography.into(),
            year,
            component: component.into(),
            values: vec![0.0; crate::calendar::HOURS_PER_YEAR],
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct SynthesizedYear {
    pub values: Vec<f64>,
    /// Days whose peak was raised to restore feasibility.
    pub repaired: usize,
    /// Days where negative hours were floored.
    pub floored: usize,
    pub days: Vec<DayDiagnostic>,
}

/// Build an hourly trace from daily energy and peak targets.
///
/// Each hour draws one sample from its pool with a stream keyed by seed,
/// geography and date. Infeasible days have their peak raised to 1.02 times
/// the mean load.
pub fn synthesize_year(
    clusters: &ClusterSet,
    targets: &DayTargets<'_>,
    reference: Option<&ReferenceWeather>,
    scaling: WeatherScaling,
    seed: u64,
    geography: &str,
) -> Result<SynthesizedYear, HourlyError> {
    let n = targets.dates.len();
    if targets.energy.len() != n || targets.peak.len() != n || targets.temps.is_some_and(|t| t.len() != n) {
        return Err(HourlyError::WrongDayCount { found: targets.energy.len().min(targets.peak.len()), expected: n });
    }
    let mut values = Vec::with_capacity(n * 24);
    let mut days = Vec::with_capacity(n);
    let (mut repaired, mut floored) = (0, 0);
    for (i, &date) in targets.dates.iter().enumerate() {
        let dt = DayType::of(date);
        let factor = match (targets.temps, reference) {
            (Some(t), Some(r)) => r
                .on(date.month(), date.day())
                .map_or(1.0, |rt| weather_scale_factor(t[i], rt, r.std, scaling)),
            _ => 1.0,
        };
        let mut rng = rng::stream(seed, &["hourly", geography], Some(date));
        let mut shape = [0.0; 24];
        for (h, s) in shape.iter_mut().enumerate() {
            let pool = clusters.pool(date.month(), dt, h);
            *s = pool[rng.random_range(0..pool.len())] * factor;
        }
        let (energy, mut peak) = (targets.energy[i], targets.peak[i]);
        let fitted = match fit_day(&shape, energy, peak) {
            Ok(f) => f,
            Err(HourlyError::InfeasibleDay { .. }) => {
                repaired += 1;
                peak = energy / 24.0 * 1.02;
                fit_day(&shape, energy, peak)?
            }
            Err(e) => return Err(e),
        };
        if fitted.floored {
            floored += 1;
        }
        days.push(DayDiagnostic {
            date,
            target_peak: peak,
            achieved_peak: fitted.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            target_energy: energy,
            achieved_energy: fitted.values.iter().sum(),
            weather_factor: factor,
        });
        values.extend_from_slice(&fitted.values);
    }
    Ok(SynthesizedYear { values, repaired, floored, days })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::model_days;

    fn reference_values() -> Vec<f64> {
        (0..8760)
            .map(|i| {
                let h = (i % 24) as f64;
                let d = (i / 24) as f64;
                1000.0 + 200.0 * ((h - 19.0) / 24.0 * std::f64::consts::TAU).cos() + 50.0 * (d / 58.0).sin()
            })
            .collect()
    }

    #[test]
    fn full_year_fills_every_pool() {
        let c = build_clusters_from(&reference_values()).unwrap();
        assert_eq!(c.len(), 576);
        // June 2015 has 22 weekdays
        assert_eq!(c.pool(6, DayType::Weekday, 14).len(), 22);
        assert_eq!(c.pool(6, DayType::Weekend, 14).len(), 8);
    }

    #[test]
    fn truncated_year_has_empty_pools() {
        let v = reference_values();
        assert!(matches!(
            build_clusters_from(&v[..31 * 24]),
            Err(HourlyError::EmptyPool { month: 2, .. })
        ));
    }

    #[test]
    fn weather_factor_values() {
        let s = WeatherScaling::default();
        assert_eq!(weather_scale_factor(25.0, 25.0, 3.0, s), 1.0);
        assert!((weather_scale_factor(28.0, 25.0, 3.0, s) - 1.05).abs() < 1e-15);
        assert_eq!(weather_scale_factor(55.0, 25.0, 3.0, s), 1.1);
        assert_eq!(weather_scale_factor(-5.0, 25.0, 3.0, s), 0.9);
    }

    #[test]
    fn closed_form_fit() {
        let mut shape = [1.0; 24];
        shape[0] = 2.0;
        shape[1] = 0.0;
        let out = fit_day(&shape, 48.0, 4.0).unwrap();
        assert_eq!(out.values, shape.map(|s| 2.0 * s));
        let flat = fit_day(&[1.0 / 24.0; 24], 48.0, 2.0).unwrap();
        assert!(flat.values.iter().all(|v| *v == 2.0));
        assert!(matches!(fit_day(&shape, 48.0, 1.0), Err(HourlyError::InfeasibleDay { .. })));
        assert!(matches!(fit_day(&[1.0; 24], 48.0, 3.0), Err(HourlyError::FlatShape { .. })));
    }

    #[test]
    fn negative_hours_are_floored() {
        let mut shape = [1.0; 24];
        shape[5] = 10.0;
        shape[6] = 0.0;
        let out = fit_day(&shape, 240.0, 200.0).unwrap();
        assert!(out.floored);
        assert!(out.values.iter().all(|v| *v >= 0.0));
        assert!((out.values.iter().sum::<f64>() - 240.0).abs() < 1e-9);
        assert_eq!(out.values[5], 200.0);
    }

    #[test]
    fn single_sample_pools_reproduce_reference_shape() {
        let clusters = ClusterSet { pools: (0..POOL_COUNT).map(|i| vec![1.0 + (i % 24) as f64 / 10.0]).collect() };
        let dates = model_days(2030);
        let energy = vec![24_000.0; 365];
        let peak = vec![1300.0; 365];
        let t = DayTargets { dates: &dates, energy: &energy, peak: &peak, temps: None };
        let a = synthesize_year(&clusters, &t, None, WeatherScaling::default(), 1, "SR").unwrap();
        let b = synthesize_year(&clusters, &t, None, WeatherScaling::default(), 1, "SR").unwrap();
        assert_eq!(a.values, b.values);
        let day0 = &a.values[..24];
        let expected = fit_day(&std::array::from_fn(|h| 1.0 + h as f64 / 10.0), 24_000.0, 1300.0).unwrap();
        assert_eq!(day0, &expected.values);
    }
}
