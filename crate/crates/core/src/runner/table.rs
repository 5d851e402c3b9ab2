use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveTime;
use serde::Serialize;

use super::RunError;
use crate::calendar::{model_days, HOURS_PER_YEAR};

pub const COLUMNS: [&str; 7] = ["DateTime", "Base", "Com AC", "Res AC", "E2W", "E3W", "E4W"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    Base,
    ComAc,
    ResAc,
    E2W,
    E3W,
    E4W,
}

impl Component {
    pub const ALL: [Component; 6] =
        [Component::Base, Component::ComAc, Component::ResAc, Component::E2W, Component::E3W, Component::E4W];

    pub fn label(self) -> &'static str {
        COLUMNS[self as usize + 1]
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Hourly MW per component for one geography and year.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub geography: String,
    pub year: i32,
    pub columns: [Vec<f64>; 6],
}

impl OutputTable {
    pub fn total_at(&self, hour: usize) -> f64 {
        self.columns.iter().map(|c| c[hour]).sum()
    }

    /// Annual energy per component in GWh.
    pub fn annual_gwh(&self) -> [f64; 6] {
        std::array::from_fn(|i| self.columns[i].iter().sum::<f64>() / 1000.0)
    }
}

/// Stack component traces into a table, checking lengths and signs.
pub fn assemble(geography: &str, year: i32, columns: [Vec<f64>; 6]) -> Result<OutputTable, RunError> {
    for (c, values) in Component::ALL.iter().zip(&columns) {
        if values.len() != HOURS_PER_YEAR {
            return Err(RunError::ComponentLengthMismatch {
                geography: geography.into(),
                component: c.label(),
                found: values.len(),
            });
        }
        if let Some(h) = values.iter().position(|v| !(*v >= 0.0)) {
            return Err(RunError::NegativeValue { geography: geography.into(), component: c.label(), hour: h });
        }
    }
    Ok(OutputTable { geography: geography.into(), year, columns })
}

/// Cell-wise sum of member tables.
pub fn aggregate(geography: &str, members: &[&OutputTable]) -> Result<OutputTable, RunError> {
    let first = members.first().ok_or_else(|| RunError::EmptyAggregate(geography.into()))?;
    let mut columns: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; HOURS_PER_YEAR]);
    for m in members {
        if m.year != first.year || m.columns.iter().any(|c| c.len() != HOURS_PER_YEAR) {
            return Err(RunError::MisalignedTimestamps {
                geography: geography.into(),
                member: m.geography.clone(),
            });
        }
        for (acc, col) in columns.iter_mut().zip(&m.columns) {
            for (a, v) in acc.iter_mut().zip(col) {
                *a += v;
            }
        }
    }
    Ok(OutputTable { geography: geography.into(), year: first.year, columns })
}

/// Annual GWh per component, one row per snapshot year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub geography: String,
    pub rows: Vec<(i32, [f64; 6])>,
}

pub fn hour_stamps(year: i32) -> Vec<String> {
    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for d in model_days(year) {
        for h in 0..24 {
            let ts = d.and_time(NaiveTime::from_hms_opt(h, 0, 0).unwrap());
            out.push(ts.format("%Y-%m-%dT%H:%M:%S").to_string());
        }
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    }
    Ok(BufWriter::with_capacity(1 << 20, File::create(path).map_err(|e| RunError::io(path, e))?))
}

pub fn write_detailed(path: &Path, table: &OutputTable, stamps: &[String]) -> Result<(), RunError> {
    let mut w = create(path)?;
    let mut line = String::with_capacity(256);
    line.push_str(&COLUMNS.join(","));
    line.push('\n');
    for (h, stamp) in stamps.iter().enumerate() {
        line.push_str(stamp);
        for col in &table.columns {
            let _ = write!(line, ",{}", col[h]);
        }
        line.push('\n');
        if line.len() > 1 << 16 {
            w.write_all(line.as_bytes()).map_err(|e| RunError::io(path, e))?;
            line.clear();
        }
    }
    w.write_all(line.as_bytes()).map_err(|e| RunError::io(path, e))?;
    w.flush().map_err(|e| RunError::io(path, e))
}

pub fn write_summary(path: &Path, table: &SummaryTable) -> Result<(), RunError> {
    let mut w = create(path)?;
    let mut text = COLUMNS.join(",");
    text.push('\n');
    for (year, values) in &table.rows {
        let _ = write!(text, "{year}");
        for v in values {
            let _ = write!(text, ",{v}");
        }
        text.push('\n');
    }
    w.write_all(text.as_bytes()).map_err(|e| RunError::io(path, e))?;
    w.flush().map_err(|e| RunError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(geo: &str, scale: f64) -> OutputTable {
        let cols = std::array::from_fn(|c| (0..HOURS_PER_YEAR).map(|h| scale * (c + 1) as f64 + h as f64 * 1e-3).collect());
        assemble(geo, 2050, cols).unwrap()
    }

    #[test]
    fn assemble_checks_lengths() {
        let mut cols: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; HOURS_PER_YEAR]);
        cols[3].pop();
        assert!(matches!(assemble("X", 2050, cols), Err(RunError::ComponentLengthMismatch { component: "E2W", .. })));
    }

    #[test]
    fn aggregation_is_cellwise() {
        let a = table("A", 1.0);
        let b = table("B", 2.0);
        let single = aggregate("R", &[&a]).unwrap();
        assert_eq!(single.columns, a.columns);
        let both = aggregate("R", &[&a, &b]).unwrap();
        for c in 0..6 {
            for h in [0, 100, 8759] {
                assert_eq!(both.columns[c][h], a.columns[c][h] + b.columns[c][h]);
            }
        }
        let mut other = table("C", 1.0);
        other.year = 2045;
        assert!(matches!(aggregate("R", &[&a, &other]), Err(RunError::MisalignedTimestamps { .. })));
    }

    #[test]
    fn stamps_skip_leap_day() {
        let s = hour_stamps(2048);
        assert_eq!(s.len(), 8760);
        assert_eq!(s[0], "2048-01-01T00:00:00");
        assert_eq!(s[59 * 24], "2048-03-01T00:00:00");
    }
}
