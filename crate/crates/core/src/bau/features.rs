use std::collections::HashMap;

use chrono::{Datelike, NaiveDate};
use log::info;
use nalgebra::DMatrix;
use serde::Serialize;

use super::BauError;
use crate::ingest::{CityCatalog, Region, WeatherDaily, WEATHER_VARIABLES};

pub const GDP_COLUMN: &str = "GDP";
const STATS: [&str; 3] = ["min", "max", "avg"];

/// Daily weather keyed by city and date.
#[derive(Debug, Clone, Default)]
pub struct WeatherIndex<'a> {
    by_city: HashMap<&'a str, HashMap<NaiveDate, &'a WeatherDaily>>,
}

impl<'a> WeatherIndex<'a> {
    pub fn new(days: &'a [WeatherDaily]) -> Self {
        let mut by_city: HashMap<&str, HashMap<NaiveDate, &WeatherDaily>> = HashMap::new();
        for d in days {
            by_city.entry(d.city.as_str()).or_default().insert(d.date, d);
        }
        WeatherIndex { by_city }
    }

    pub fn get(&self, city: &str, date: NaiveDate) -> Option<&'a WeatherDaily> {
        self.by_city.get(city)?.get(&date).copied()
    }

    /// Population-weighted mean 2 m temperature (°C) over a region's cities.
    pub fn regional_t2m(&self, catalog: &CityCatalog, region: Region, date: NaiveDate) -> Result<f64, BauError> {
        let mut sum = 0.0;
        let mut weight = 0.0;
        for city in catalog.cities(region) {
            let day = self
                .get(&city.name, date)
                .ok_or_else(|| BauError::MissingWeatherDay { city: city.name.clone(), date })?;
            sum += city.weight * day.mean_t2m_celsius();
            weight += city.weight;
        }
        if weight > 0.0 {
            Ok(sum / weight)
        } else {
            Ok(0.0)
        }
    }
}

/// Unstandardized features, one row per day.
#[derive(Debug, Clone)]
pub struct RawFeatures {
    pub region: Region,
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<String>,
    pub values: DMatrix<f64>,
}

pub fn column_names(catalog: &CityCatalog, region: Region) -> Vec<String> {
    let mut names = Vec::with_capacity(catalog.cities(region).len() * 33 + 1);
    for city in catalog.cities(region) {
        for var in WEATHER_VARIABLES {
            for stat in STATS {
                names.push(format!("{} {var} {stat}", city.name));
            }
        }
    }
    names.push(GDP_COLUMN.to_string());
    names
}

/// Assemble weather and GDP features for `dates`.
///
/// `weather_date` maps each modeled day to the day whose weather it uses,
/// which lets projected years borrow a historical weather year. `gdp` gives
/// the regional GDP of a year, held constant within the year.
pub fn raw_features(
    weather: &WeatherIndex<'_>,
    catalog: &CityCatalog,
    region: Region,
    dates: &[NaiveDate],
    weather_date: impl Fn(NaiveDate) -> NaiveDate,
    gdp: impl Fn(i32) -> Option<f64>,
) -> Result<RawFeatures, BauError> {
    let columns = column_names(catalog, region);
    let cities = catalog.cities(region);
    let p = columns.len();
    let mut values = DMatrix::<f64>::zeros(dates.len(), p);
    for (i, &date) in dates.iter().enumerate() {
        let wd = weather_date(date);
        for (c, city) in cities.iter().enumerate() {
            let day = weather
                .get(&city.name, wd)
                .ok_or_else(|| BauError::MissingWeatherDay { city: city.name.clone(), date: wd })?;
            for (v, s) in day.stats.iter().enumerate() {
                let base = c * 33 + v * 3;
                values[(i, base)] = s.min;
                values[(i, base + 1)] = s.max;
                values[(i, base + 2)] = s.avg;
            }
        }
        values[(i, p - 1)] = gdp(date.year()).ok_or(BauError::MissingGdp { region, year: date.year() })?;
    }
    Ok(RawFeatures { region, dates: dates.to_vec(), columns, values })
}

/// Column means and standard deviations fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardization {
    /// Every raw column, in order.
    pub source_columns: Vec<String>,
    /// Retained columns with nonzero training variance.
    pub columns: Vec<String>,
    pub dropped: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    #[serde(skip)]
    keep: Vec<usize>,
}

impl Standardization {
    pub fn fit(raw: &RawFeatures, rows: &[usize]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut columns = Vec::new();
        let mut dropped = Vec::new();
        let mut mean = Vec::new();
        let mut std = Vec::new();
        let mut keep = Vec::new();
        for (j, name) in raw.columns.iter().enumerate() {
            let col = raw.values.column(j);
            let m = rows.iter().map(|&i| col[i]).sum::<f64>() / n;
            let var = rows.iter().map(|&i| (col[i] - m).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            if s > 1e-12 * m.abs().max(1.0) {
                columns.push(name.clone());
                mean.push(m);
                std.push(s);
                keep.push(j);
            } else {
                dropped.push(name.clone());
            }
        }
        if !dropped.is_empty() {
            info!("{}: dropped {} zero-variance feature columns: {}", raw.region, dropped.len(), dropped.join(", "));
        }
        Standardization { source_columns: raw.columns.clone(), columns, dropped, mean, std, keep }
    }

    /// Standardize `raw` with these statistics. Its columns must match the
    /// training columns exactly.
    pub fn apply(&self, raw: &RawFeatures) -> Result<DMatrix<f64>, BauError> {
        if raw.columns != self.source_columns {
            let missing: Vec<&str> =
                self.source_columns.iter().filter(|c| !raw.columns.contains(c)).map(String::as_str).collect();
            let extra: Vec<&str> =
                raw.columns.iter().filter(|c| !self.source_columns.contains(c)).map(String::as_str).collect();
            let detail = if missing.is_empty() && extra.is_empty() {
                "column order differs".to_string()
            } else {
                format!("missing [{}], unexpected [{}]", missing.join(", "), extra.join(", "))
            };
            return Err(BauError::FeatureMismatch(detail));
        }
        let n = raw.values.nrows();
        let mut out = DMatrix::<f64>::zeros(n, self.keep.len());
        for (k, &j) in self.keep.iter().enumerate() {
            let src = raw.values.column(j);
            let (m, s) = (self.mean[k], self.std[k]);
            for i in 0..n {
                out[(i, k)] = (src[i] - m) / s;
            }
        }
        Ok(out)
    }
}

/// Standardized features with the statistics that produced them.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub region: Region,
    pub dates: Vec<NaiveDate>,
    pub scaling: Standardization,
    pub x: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn columns(&self) -> &[String] {
        &self.scaling.columns
    }

    pub fn rows_where(&self, keep: impl Fn(NaiveDate) -> bool) -> Vec<usize> {
        self.dates.iter().enumerate().filter(|(_, d)| keep(**d)).map(|(i, _)| i).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> DMatrix<f64> {
        self.x.select_rows(rows)
    }
}

/// Standardize `raw` over the rows whose dates satisfy `training`, dropping
/// zero-variance columns.
pub fn build_features(raw: RawFeatures, training: impl Fn(NaiveDate) -> bool) -> Result<FeatureMatrix, BauError> {
    let rows: Vec<usize> = raw.dates.iter().enumerate().filter(|(_, d)| training(**d)).map(|(i, _)| i).collect();
    if rows.len() < 2 {
        return Err(BauError::TooFewRows { found: rows.len(), required: 2 });
    }
    let scaling = Standardization::fit(&raw, &rows);
    let x = scaling.apply(&raw)?;
    Ok(FeatureMatrix { region: raw.region, dates: raw.dates, scaling, x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DailyStat;

    fn weather_for(catalog: &CityCatalog, region: Region, dates: &[NaiveDate], constant_var: usize) -> Vec<WeatherDaily> {
        let mut out = Vec::new();
        for city in catalog.cities(region) {
            for (i, d) in dates.iter().enumerate() {
                let mut stats = [DailyStat { min: 0.0, max: 0.0, avg: 0.0 }; 11];
                for (v, s) in stats.iter_mut().enumerate() {
                    let base = if v == constant_var { 5.0 } else { 280.0 + (i as f64 * 0.37 + v as f64).sin() * 5.0 };
                    *s = DailyStat { min: base - 1.0, max: base + 1.0, avg: base };
                }
                out.push(WeatherDaily { city: city.name.clone(), date: *d, stats });
            }
        }
        out
    }

    #[test]
    fn southern_region_column_count() {
        let catalog = CityCatalog::default();
        assert_eq!(catalog.cities(Region::SR).len(), 7);
        assert_eq!(column_names(&catalog, Region::SR).len(), 7 * 33 + 1);
        assert!(column_names(&catalog, Region::SR).iter().any(|c| c == "Bangalore t2m max"));
    }

    #[test]
    fn constant_columns_are_dropped_and_training_means_vanish() {
        let catalog = CityCatalog::default();
        let dates: Vec<NaiveDate> =
            (0..60).map(|i| NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + chrono::Days::new(i)).collect();
        let days = weather_for(&catalog, Region::NER, &dates, 8);
        let index = WeatherIndex::new(&days);
        let raw = raw_features(&index, &catalog, Region::NER, &dates, |d| d, |y| Some(1e9 * f64::from(y - 2000))).unwrap();
        let fm = build_features(raw, |d| d.month() == 1).unwrap();
        // var index 8 is constant for each of 3 cities × 3 stats, and GDP is constant within a year
        assert_eq!(fm.scaling.dropped.len(), 3 * 3 + 1);
        assert!(fm.scaling.dropped.iter().any(|c| c == GDP_COLUMN));
        let train = fm.rows_where(|d| d.month() == 1);
        for j in 0..fm.x.ncols() {
            let m = train.iter().map(|&i| fm.x[(i, j)]).sum::<f64>() / train.len() as f64;
            assert!(m.abs() < 1e-12, "column {j} mean {m}");
        }
    }

    #[test]
    fn missing_weather_and_mismatched_columns() {
        let catalog = CityCatalog::default();
        let dates = vec![NaiveDate::from_ymd_opt(2015, 1, 1).unwrap(), NaiveDate::from_ymd_opt(2015, 1, 2).unwrap()];
        let days = weather_for(&catalog, Region::ER, &dates[..1], 99);
        let index = WeatherIndex::new(&days);
        assert!(matches!(
            raw_features(&index, &catalog, Region::ER, &dates, |d| d, |_| Some(1.0)),
            Err(BauError::MissingWeatherDay { .. })
        ));

        let days = weather_for(&catalog, Region::ER, &dates, 99);
        let index = WeatherIndex::new(&days);
        let raw = raw_features(&index, &catalog, Region::ER, &dates, |d| d, |_| Some(1.0)).unwrap();
        let fm = build_features(raw.clone(), |_| true).unwrap();
        let mut cut = raw;
        cut.columns.remove(0);
        cut.values = cut.values.remove_column(0);
        assert!(matches!(fm.scaling.apply(&cut), Err(BauError::FeatureMismatch(_))));
    }
}
