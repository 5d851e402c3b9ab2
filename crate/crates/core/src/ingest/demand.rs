use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::csvio::{self, CsvTable};
use super::{IngestError, Region};

/// One region's observed daily peak (MW) and energy (MWh).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyDemandRecord {
    pub date: NaiveDate,
    pub region: Region,
    pub peak_mw: f64,
    pub energy_mwh: f64,
}

const COLUMNS: [&str; 4] = ["date", "region", "peak_mw", "energy_mwh"];

/// Load `demand_daily.csv`, sorted by `(region, date)`.
pub fn load_daily_demand(path: &Path) -> Result<Vec<DailyDemandRecord>, IngestError> {
    let mut table = CsvTable::open(path)?;
    let idx = table.columns(&COLUMNS)?;
    let file = table.file.clone();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    table.for_each_byte_record(|line, rec| {
        let date = csvio::parse_date(&file, line, "date", csvio::field(&file, line, rec, idx[0], "date")?)?;
        let region_text = csvio::field(&file, line, rec, idx[1], "region")?;
        let region: Region = region_text.parse().map_err(|_| IngestError::Parse {
            file: file.clone(),
            row: line,
            column: "region".into(),
            value: region_text.into(),
        })?;
        let peak = csvio::parse_f64(&file, line, "peak_mw", csvio::field(&file, line, rec, idx[2], "peak_mw")?)?;
        let energy = csvio::parse_f64(&file, line, "energy_mwh", csvio::field(&file, line, rec, idx[3], "energy_mwh")?)?;
        for (column, value) in [("peak_mw", peak), ("energy_mwh", energy)] {
            if value <= 0.0 {
                return Err(IngestError::NonPositiveValue { file: file.clone(), row: line, column: column.into(), value });
            }
        }
        if energy / 24.0 > peak {
            return Err(IngestError::MeanExceedsPeak { file: file.clone(), row: line, mean_mw: energy / 24.0, peak_mw: peak });
        }
        if !seen.insert((region, date)) {
            return Err(IngestError::DuplicateDay { file: file.clone(), row: line, key: region.to_string(), date });
        }
        out.push(DailyDemandRecord { date, region, peak_mw: peak, energy_mwh: energy });
        Ok(())
    })?;
    out.sort_by_key(|r| (r.region, r.date));
    Ok(out)
}

pub fn write_daily_demand(path: &Path, records: &[DailyDemandRecord]) -> Result<(), IngestError> {
    csvio::write_table(path, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let path = dir.path().join("demand_daily.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn parses_a_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "date,region,peak_mw,energy_mwh\n2015-06-01,SR,35000,720000\n");
        let recs = load_daily_demand(&p).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].region, Region::SR);
        assert_eq!(recs[0].peak_mw, 35000.0);
        assert_eq!(recs[0].energy_mwh, 720000.0);
    }

    #[test]
    fn mean_above_peak_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "date,region,peak_mw,energy_mwh\n2015-06-01,SR,35000,900000\n");
        match load_daily_demand(&p) {
            Err(IngestError::MeanExceedsPeak { row, mean_mw, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(mean_mw, 37500.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_has_no_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "");
        assert!(matches!(load_daily_demand(&p), Err(IngestError::MissingColumn { .. })));
    }

    #[test]
    fn non_positive_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "date,region,peak_mw,energy_mwh\n2015-06-01,SR,0,720000\n");
        assert!(matches!(load_daily_demand(&p), Err(IngestError::NonPositiveValue { .. })));
        let p = write(
            &dir,
            "date,region,peak_mw,energy_mwh\n2015-06-01,SR,35000,720000\n2015-06-01,SR,35000,720000\n",
        );
        assert!(matches!(load_daily_demand(&p), Err(IngestError::DuplicateDay { row: 3, .. })));
    }

    #[test]
    fn output_is_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "date,region,peak_mw,energy_mwh\n2015-06-02,SR,35000,720000\n2015-06-01,NR,35000,720000\n2015-06-01,SR,35000,720000\n",
        );
        let recs = load_daily_demand(&p).unwrap();
        let keys: Vec<_> = recs.iter().map(|r| (r.region, r.date.to_string())).collect();
        assert_eq!(keys[0].0, Region::NR);
        assert_eq!(keys[1], (Region::SR, "2015-06-01".to_string()));
    }
}
