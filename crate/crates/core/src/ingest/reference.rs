use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};

use super::csvio::{self, CsvTable};
use super::{IngestError, Region};
use crate::calendar::{HOURS_PER_YEAR, REFERENCE_YEAR};

/// One region's hourly load for the reference calendar year.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLoadYear {
    pub region: Region,
    pub values: Vec<f64>,
}

impl ReferenceLoadYear {
    pub fn new(region: Region, values: Vec<f64>) -> Result<Self, IngestError> {
        if values.len() != HOURS_PER_YEAR {
            return Err(IngestError::WrongRowCount {
                file: "reference".into(),
                key: region.to_string(),
                found: values.len(),
                expected: HOURS_PER_YEAR,
            });
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(IngestError::NonPositiveValue {
                file: "reference".into(),
                row: i as u64,
                column: "mw".into(),
                value: v,
            });
        }
        Ok(ReferenceLoadYear { region, values })
    }

    pub fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(REFERENCE_YEAR, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }
}

/// Load `reference_2015.csv`: exactly 8760 positive hourly rows per region.
pub fn load_reference_year(path: &Path) -> Result<BTreeMap<Region, ReferenceLoadYear>, IngestError> {
    let mut table = CsvTable::open(path)?;
    let idx = table.columns(&["region", "timestamp", "mw"])?;
    let file = table.file.clone();
    let mut rows: BTreeMap<Region, Vec<(NaiveDateTime, f64)>> = BTreeMap::new();
    table.for_each_byte_record(|line, rec| {
        let region_text = csvio::field(&file, line, rec, idx[0], "region")?;
        let region: Region = region_text.parse().map_err(|_| IngestError::Parse {
            file: file.clone(),
            row: line,
            column: "region".into(),
            value: region_text.into(),
        })?;
        let ts = csvio::parse_ts(&file, line, "timestamp", csvio::field(&file, line, rec, idx[1], "timestamp")?)?;
        let mw = csvio::parse_f64(&file, line, "mw", csvio::field(&file, line, rec, idx[2], "mw")?)?;
        if mw <= 0.0 {
            return Err(IngestError::NonPositiveValue { file: file.clone(), row: line, column: "mw".into(), value: mw });
        }
        rows.entry(region).or_default().push((ts, mw));
        Ok(())
    })?;
    let mut out = BTreeMap::new();
    for (region, mut series) in rows {
        if series.len() != HOURS_PER_YEAR {
            return Err(IngestError::WrongRowCount {
                file: file.clone(),
                key: region.to_string(),
                found: series.len(),
                expected: HOURS_PER_YEAR,
            });
        }
        series.sort_by_key(|(ts, _)| *ts);
        let values = series.into_iter().map(|(_, v)| v).collect();
        out.insert(region, ReferenceLoadYear { region, values });
    }
    Ok(out)
}

pub fn write_reference_years(path: &Path, years: &[ReferenceLoadYear]) -> Result<(), IngestError> {
    let mut w = csvio::create_writer(path)?;
    let csv_err = |e: csv::Error| IngestError::Csv { file: csvio::file_label(path), message: e.to_string() };
    w.write_record(["region", "timestamp", "mw"]).map_err(csv_err)?;
    let start = ReferenceLoadYear::start();
    for year in years {
        for (h, v) in year.values.iter().enumerate() {
            let ts = start + Duration::hours(h as i64);
            w.write_record([year.region.code().to_string(), csvio::format_timestamp(ts), v.to_string()])
                .map_err(csv_err)?;
        }
    }
    csvio::finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn year(values: Vec<f64>) -> ReferenceLoadYear {
        ReferenceLoadYear { region: Region::SR, values }
    }

    #[test]
    fn accepts_full_year_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reference_2015.csv");
        let values: Vec<f64> = (0..8760).map(|h| 100.0 + (h % 24) as f64).collect();
        write_reference_years(&path, &[year(values.clone())]).unwrap();
        let loaded = load_reference_year(&path).unwrap();
        assert_eq!(loaded[&Region::SR].values, values);
    }

    #[test]
    fn leap_length_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reference_2015.csv");
        write_reference_years(&path, &[year(vec![1.0; 8784])]).unwrap();
        match load_reference_year(&path) {
            Err(IngestError::WrongRowCount { found, expected, .. }) => assert_eq!((found, expected), (8784, 8760)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_value_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reference_2015.csv");
        let mut values = vec![1.0; 8760];
        values[4000] = 0.0;
        write_reference_years(&path, &[year(values.clone())]).unwrap();
        assert!(matches!(load_reference_year(&path), Err(IngestError::NonPositiveValue { .. })));
        assert!(ReferenceLoadYear::new(Region::SR, values).is_err());
    }
}
