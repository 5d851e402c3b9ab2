use std::collections::HashMap;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use super::csvio::{self, CsvTable};
use super::IngestError;

/// Hourly reanalysis variables kept per city, in column order.
///
/// Humidity (`h`), temperature (`t`), eastward (`u`) and northward (`v`) wind
/// at 2 m and 10 m, then precipitable ice, liquid water and water vapor.
pub const WEATHER_VARIABLES: [&str; 11] = ["h2m", "h10m", "t2m", "t10m", "u2m", "u10m", "v2m", "v10m", "tqi", "tql", "tqv"];

pub(crate) const T2M: usize = 2;
const TEMPERATURE_COLUMNS: [usize; 2] = [2, 3];

/// Days with fewer hourly samples than this are rejected.
pub const MIN_SAMPLES_PER_DAY: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSample {
    pub city: String,
    pub timestamp: NaiveDateTime,
    pub values: [f64; 11],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyStat {
    pub min: f64,
    pub max: f64,
    pub avg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherDaily {
    pub city: String,
    pub date: NaiveDate,
    pub stats: [DailyStat; 11],
}

impl WeatherDaily {
    /// Daily mean 2 m temperature in degrees Celsius.
    pub fn mean_t2m_celsius(&self) -> f64 {
        self.stats[T2M].avg - 273.15
    }
}

#[derive(Clone)]
struct Accumulator {
    count: usize,
    min: [f64; 11],
    max: [f64; 11],
    sum: [f64; 11],
}

impl Accumulator {
    fn new() -> Self {
        Accumulator { count: 0, min: [f64::INFINITY; 11], max: [f64::NEG_INFINITY; 11], sum: [0.0; 11] }
    }
}

/// Streaming (city, day) aggregation of hourly samples.
#[derive(Default)]
pub struct DailyAggregator {
    cities: HashMap<String, usize>,
    names: Vec<String>,
    days: HashMap<(usize, NaiveDate), Accumulator>,
}

impl DailyAggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, city: &str, timestamp: NaiveDateTime, values: &[f64; 11]) {
        let idx = match self.cities.get(city) {
            Some(&i) => i,
            None => {
                let i = self.names.len();
                self.names.push(city.to_string());
                self.cities.insert(city.to_string(), i);
                i
            }
        };
        let acc = self.days.entry((idx, timestamp.date())).or_insert_with(Accumulator::new);
        acc.count += 1;
        for (k, &v) in values.iter().enumerate() {
            acc.min[k] = acc.min[k].min(v);
            acc.max[k] = acc.max[k].max(v);
            acc.sum[k] += v;
        }
    }

    /// One record per (city, day), sorted by city then date.
    pub fn finish(self) -> Result<Vec<WeatherDaily>, IngestError> {
        let mut keys: Vec<_> = self.days.keys().copied().collect();
        keys.sort_by(|a, b| self.names[a.0].cmp(&self.names[b.0]).then(a.1.cmp(&b.1)));
        let mut out = Vec::with_capacity(keys.len());
        for key in keys {
            let acc = &self.days[&key];
            if acc.count < MIN_SAMPLES_PER_DAY {
                return Err(IngestError::IncompleteDay {
                    city: self.names[key.0].clone(),
                    date: key.1,
                    found: acc.count,
                    required: MIN_SAMPLES_PER_DAY,
                });
            }
            let n = acc.count as f64;
            let stats = std::array::from_fn(|k| {
                // the mean of values in [min, max] can round just outside it
                let avg = (acc.sum[k] / n).clamp(acc.min[k], acc.max[k]);
                DailyStat { min: acc.min[k], max: acc.max[k], avg }
            });
            out.push(WeatherDaily { city: self.names[key.0].clone(), date: key.1, stats });
        }
        Ok(out)
    }
}

/// Daily minimum, maximum and mean of each variable per (city, day).
pub fn aggregate_weather_daily(samples: &[WeatherSample]) -> Result<Vec<WeatherDaily>, IngestError> {
    let mut agg = DailyAggregator::new();
    for s in samples {
        agg.push(&s.city, s.timestamp, &s.values);
    }
    agg.finish()
}

fn scan(path: &Path, mut sink: impl FnMut(&str, NaiveDateTime, &[f64; 11])) -> Result<(), IngestError> {
    let mut table = CsvTable::open(path)?;
    let city_idx = table.column("city")?;
    let ts_idx = table.column("timestamp")?;
    let var_idx = table.columns(&WEATHER_VARIABLES)?;
    let file = table.file.clone();
    table.for_each_byte_record(|line, rec| {
        let city = csvio::field(&file, line, rec, city_idx, "city")?;
        let ts = csvio::parse_ts(&file, line, "timestamp", csvio::field(&file, line, rec, ts_idx, "timestamp")?)?;
        let mut values = [0.0; 11];
        for (k, &i) in var_idx.iter().enumerate() {
            let name = WEATHER_VARIABLES[k];
            values[k] = csvio::parse_f64(&file, line, name, csvio::field(&file, line, rec, i, name)?)?;
        }
        for &k in &TEMPERATURE_COLUMNS {
            if values[k] <= 0.0 {
                return Err(IngestError::NonPositiveValue {
                    file: file.clone(),
                    row: line,
                    column: WEATHER_VARIABLES[k].into(),
                    value: values[k],
                });
            }
        }
        sink(city, ts, &values);
        Ok(())
    })
}

/// Read `weather_hourly.csv` into memory.
pub fn read_weather_samples(path: &Path) -> Result<Vec<WeatherSample>, IngestError> {
    let mut out = Vec::new();
    scan(path, |city, timestamp, values| {
        out.push(WeatherSample { city: city.to_string(), timestamp, values: *values })
    })?;
    Ok(out)
}

/// Stream `weather_hourly.csv` straight into daily statistics.
pub fn load_weather_daily(path: &Path) -> Result<Vec<WeatherDaily>, IngestError> {
    let mut agg = DailyAggregator::new();
    scan(path, |city, ts, values| agg.push(city, ts, values))?;
    agg.finish()
}

pub fn write_weather_samples(path: &Path, samples: &[WeatherSample]) -> Result<(), IngestError> {
    let mut w = csvio::create_writer(path)?;
    let csv_err = |e: csv::Error| IngestError::Csv { file: csvio::file_label(path), message: e.to_string() };
    let mut header = vec!["city", "timestamp"];
    header.extend(WEATHER_VARIABLES);
    w.write_record(&header).map_err(csv_err)?;
    let mut row: Vec<String> = Vec::with_capacity(13);
    for s in samples {
        row.clear();
        row.push(s.city.clone());
        row.push(csvio::format_timestamp(s.timestamp));
        row.extend(s.values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    csvio::finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(city: &str, day: u32, hour: u32, t2m: f64) -> WeatherSample {
        let mut values = [1.0; 11];
        values[T2M] = t2m;
        values[3] = t2m;
        WeatherSample {
            city: city.into(),
            timestamp: NaiveDate::from_ymd_opt(2015, 6, day).unwrap().and_hms_opt(hour, 0, 0).unwrap(),
            values,
        }
    }

    #[test]
    fn constant_day() {
        let s: Vec<_> = (0..24).map(|h| sample("Chennai", 1, h, 300.0)).collect();
        let d = aggregate_weather_daily(&s).unwrap();
        assert_eq!(d.len(), 1);
        let st = d[0].stats[T2M];
        assert_eq!((st.min, st.max, st.avg), (300.0, 300.0, 300.0));
    }

    #[test]
    fn half_and_half_day() {
        let s: Vec<_> = (0..24).map(|h| sample("Chennai", 1, h, if h < 12 { 290.0 } else { 310.0 })).collect();
        let st = aggregate_weather_daily(&s).unwrap()[0].stats[T2M];
        assert_eq!((st.min, st.max, st.avg), (290.0, 310.0, 300.0));
    }

    #[test]
    fn sparse_day_is_incomplete() {
        let s: Vec<_> = (0..10).map(|h| sample("Chennai", 1, h, 300.0)).collect();
        assert!(matches!(aggregate_weather_daily(&s), Err(IngestError::IncompleteDay { found: 10, .. })));
        // 20 of 24 is tolerated
        let s: Vec<_> = (0..20).map(|h| sample("Chennai", 1, h, 300.0)).collect();
        assert!(aggregate_weather_daily(&s).is_ok());
    }

    #[test]
    fn groups_by_city_and_day() {
        let mut s: Vec<_> = (0..24).map(|h| sample("Madurai", 2, h, 301.0)).collect();
        s.extend((0..24).map(|h| sample("Chennai", 1, h, 300.0)));
        s.extend((0..24).map(|h| sample("Chennai", 2, h, 302.0)));
        let d = aggregate_weather_daily(&s).unwrap();
        let keys: Vec<_> = d.iter().map(|w| (w.city.as_str(), w.date.to_string())).collect();
        assert_eq!(
            keys,
            vec![("Chennai", "2015-06-01".into()), ("Chennai", "2015-06-02".into()), ("Madurai", "2015-06-02".into())]
        );
    }

    #[test]
    fn missing_variable_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weather_hourly.csv");
        std::fs::write(&path, "city,timestamp,h2m,h10m,t2m,t10m,u2m,u10m,v2m,v10m,tqi,tql\n").unwrap();
        match load_weather_daily(&path) {
            Err(IngestError::MissingColumn { column, .. }) => assert_eq!(column, "tqv"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weather_hourly.csv");
        let s: Vec<_> = (0..24).map(|h| sample("Chennai", 1, h, 290.0 + 0.37 * h as f64)).collect();
        write_weather_samples(&path, &s).unwrap();
        assert_eq!(read_weather_samples(&path).unwrap(), s);
        assert_eq!(load_weather_daily(&path).unwrap(), aggregate_weather_daily(&s).unwrap());
    }
}
