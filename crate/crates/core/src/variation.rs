//! Natural variation: residual statistics per month and seeded noise
//! injection into projected daily series.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::bau::{DailySeries, Target};
use crate::ingest::Region;
use crate::rng;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("no residuals for month {0}")]
    EmptyMonth(u32),
    #[error("noise model has no entry for {region} {target}")]
    MissingEntry { region: Region, target: Target },
    #[error("invalid noise statistics: {0}")]
    Invalid(String),
    #[error("writing {path}: {message}")]
    Io { path: String, message: String },
}

/// Mean and standard deviation of absolute residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseStat {
    pub mean_abs: f64,
    pub std_abs: f64,
}

/// Per-month statistics, January first.
pub type MonthlyNoise = [NoiseStat; 12];

/// Absolute-residual statistics grouped by calendar month.
pub fn estimate_noise(residuals: &[(NaiveDate, f64)]) -> Result<MonthlyNoise, NoiseError> {
    let mut groups: [Vec<f64>; 12] = Default::default();
    for (d, r) in residuals {
        groups[d.month0() as usize].push(r.abs());
    }
    let mut out = [NoiseStat::default(); 12];
    for (m, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(NoiseError::EmptyMonth(m as u32 + 1));
        }
        let n = g.len() as f64;
        let mean = g.iter().sum::<f64>() / n;
        let var = g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        out[m] = NoiseStat { mean_abs: mean, std_abs: var.sqrt() };
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NoiseModel {
    entries: BTreeMap<(Region, Target), MonthlyNoise>,
}

impl NoiseModel {
    pub fn insert(&mut self, region: Region, target: Target, stats: MonthlyNoise) -> Result<(), NoiseError> {
        if stats.iter().any(|s| !(s.mean_abs >= 0.0 && s.std_abs >= 0.0)) {
            return Err(NoiseError::Invalid(format!("{region} {target}: statistics must be nonnegative")));
        }
        self.entries.insert((region, target), stats);
        Ok(())
    }

    pub fn get(&self, region: Region, target: Target) -> Result<&MonthlyNoise, NoiseError> {
        self.entries.get(&(region, target)).ok_or(NoiseError::MissingEntry { region, target })
    }

    pub fn len(&self) -> usize {
        self.entries.len() * 12
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Region, Target, &MonthlyNoise)> {
        self.entries.iter().map(|((r, t), s)| (*r, *t, s))
    }
}

/// One signed adjustment per day.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    pub region: Region,
    pub target: Target,
    pub seed: u64,
    pub dates: Vec<NaiveDate>,
    pub adjustments: Vec<f64>,
}

impl NoiseVector {
    pub fn write_csv(&self, path: &Path) -> Result<(), NoiseError> {
        let io = |e: &dyn std::fmt::Display| NoiseError::Io { path: path.display().to_string(), message: e.to_string() };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
        w.write_record(["date", "adjustment"]).map_err(|e| io(&e))?;
        for (d, a) in self.dates.iter().zip(&self.adjustments) {
            w.write_record([d.to_string(), a.to_string()]).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))
    }
}

/// Draw one day's adjustment: a random sign times a magnitude from a normal
/// truncated at zero.
pub fn draw_adjustment(rng: &mut impl Rng, stat: NoiseStat) -> f64 {
    let positive = rng.random::<bool>();
    let magnitude = if stat.std_abs == 0.0 {
        stat.mean_abs
    } else {
        let normal = Normal::new(stat.mean_abs, stat.std_abs).expect("finite nonnegative std");
        loop {
            let m = normal.sample(rng);
            if m >= 0.0 {
                break m;
            }
        }
    };
    if positive {
        magnitude
    } else {
        -magnitude
    }
}

#[derive(Debug, Clone)]
pub struct Noisy {
    pub series: DailySeries,
    pub noise: NoiseVector,
    /// Days raised to the positivity floor after noise.
    pub clamped: usize,
}

/// Add seeded natural variation to `series`. Each day draws from its own
/// stream keyed by seed, region, target and date. Results below 1% of the
/// series minimum are raised to that floor.
pub fn apply_noise(series: &DailySeries, stats: &MonthlyNoise, seed: u64) -> Noisy {
    let floor = 0.01 * series.values.iter().copied().fold(f64::INFINITY, f64::min);
    let labels = ["noise", series.region.code(), series.target.as_str()];
    let mut values = Vec::with_capacity(series.len());
    let mut adjustments = Vec::with_capacity(series.len());
    let mut clamped = 0;
    for (date, v) in series.iter() {
        let mut rng = rng::stream(seed, &labels, Some(date));
        let adj = draw_adjustment(&mut rng, stats[date.month0() as usize]);
        let mut out = v + adj;
        if out < floor {
            out = floor;
            clamped += 1;
        }
        values.push(out);
        adjustments.push(adj);
    }
    Noisy {
        series: DailySeries { values, ..series.clone() },
        noise: NoiseVector {
            region: series.region,
            target: series.target,
            seed,
            dates: series.dates.clone(),
            adjustments,
        },
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::model_days;

    fn series(value: f64) -> DailySeries {
        let dates = model_days(2030);
        DailySeries { region: Region::SR, target: Target::Peak, values: vec![value; dates.len()], dates }
    }

    #[test]
    fn absolute_residual_statistics() {
        let jan = |d| NaiveDate::from_ymd_opt(2019, 1, d).unwrap();
        let mut res: Vec<(NaiveDate, f64)> = vec![(jan(1), 2.0), (jan(2), -2.0), (jan(3), 2.0), (jan(4), -2.0)];
        for m in 2..=12 {
            res.push((NaiveDate::from_ymd_opt(2019, m, 1).unwrap(), 0.0));
        }
        let stats = estimate_noise(&res).unwrap();
        assert_eq!(stats[0], NoiseStat { mean_abs: 2.0, std_abs: 0.0 });
        assert!(stats[1..].iter().all(|s| *s == NoiseStat::default()));
        res.retain(|(d, _)| d.month() != 7);
        assert!(matches!(estimate_noise(&res), Err(NoiseError::EmptyMonth(7))));
    }

    #[test]
    fn zero_model_is_identity() {
        let s = series(1000.0);
        let out = apply_noise(&s, &[NoiseStat::default(); 12], 7);
        assert_eq!(out.series.values, s.values);
        assert_eq!(out.clamped, 0);
    }

    #[test]
    fn fixed_magnitude_and_reproducible_signs() {
        let s = series(1000.0);
        let stats = [NoiseStat { mean_abs: 10.0, std_abs: 0.0 }; 12];
        let a = apply_noise(&s, &stats, 42);
        let b = apply_noise(&s, &stats, 42);
        assert_eq!(a.series.values, b.series.values);
        assert!(a.noise.adjustments.iter().all(|x| x.abs() == 10.0));
        assert!(a.noise.adjustments.iter().any(|x| *x > 0.0) && a.noise.adjustments.iter().any(|x| *x < 0.0));
        let c = apply_noise(&s, &stats, 43);
        assert!(a.series.values.iter().zip(&c.series.values).filter(|(x, y)| x != y).count() > 0);
    }

    #[test]
    fn adjustments_average_out() {
        let stat = NoiseStat { mean_abs: 1.0, std_abs: 3.0 };
        let n = 10_000;
        let mut sum = 0.0;
        for i in 0..n {
            let mut rng = rng::stream(11, &["mean-check", &i.to_string()], None);
            sum += draw_adjustment(&mut rng, stat);
        }
        let mean: f64 = sum / n as f64;
        assert!(mean.abs() < 3.0 * stat.std_abs / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn floor_keeps_values_positive() {
        let mut s = series(100.0);
        s.values[0] = 1.0;
        let stats = [NoiseStat { mean_abs: 500.0, std_abs: 0.0 }; 12];
        let out = apply_noise(&s, &stats, 3);
        assert!(out.series.values.iter().all(|v| *v >= 0.01));
        assert!(out.clamped > 0);
    }
}
