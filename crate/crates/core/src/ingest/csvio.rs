//! Header-checked CSV reading with row-numbered errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use csv::{ByteRecord, StringRecord};
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::IngestError;

pub(crate) fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub(crate) struct CsvTable {
    pub file: String,
    reader: csv::Reader<File>,
    headers: StringRecord,
}

impl CsvTable {
    pub fn open(path: &Path) -> Result<Self, IngestError> {
        let file = file_label(path);
        let handle = File::open(path).map_err(|source| IngestError::Io { file: file.clone(), source })?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(handle);
        let headers = match reader.headers() {
            Ok(h) => h.clone(),
            Err(e) => return Err(IngestError::Csv { file, message: e.to_string() }),
        };
        Ok(CsvTable { file, reader, headers })
    }

    pub fn column(&self, column: &str) -> Result<usize, IngestError> {
        self.headers.iter().position(|h| h == column).ok_or_else(|| IngestError::MissingColumn {
            file: self.file.clone(),
            column: column.to_string(),
        })
    }

    pub fn columns(&self, columns: &[&str]) -> Result<Vec<usize>, IngestError> {
        columns.iter().map(|c| self.column(c)).collect()
    }

    /// Iterate raw records together with their 1-based line number.
    pub fn for_each_byte_record(
        &mut self,
        mut f: impl FnMut(u64, &ByteRecord) -> Result<(), IngestError>,
    ) -> Result<(), IngestError> {
        let mut record = ByteRecord::new();
        loop {
            match self.reader.read_byte_record(&mut record) {
                Ok(true) => {
                    let line = record.position().map(|p| p.line()).unwrap_or(0);
                    f(line, &record)?;
                }
                Ok(false) => return Ok(()),
                Err(e) => return Err(IngestError::Csv { file: self.file.clone(), message: e.to_string() }),
            }
        }
    }

    pub fn deserialize_all<T: DeserializeOwned>(mut self) -> Result<Vec<(u64, T)>, IngestError> {
        let headers = self.headers.clone();
        let mut out = Vec::new();
        for result in self.reader.records() {
            let record = result.map_err(|e| IngestError::Csv { file: self.file.clone(), message: e.to_string() })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let value: T = record.deserialize(Some(&headers)).map_err(|e| IngestError::Parse {
                file: self.file.clone(),
                row: line,
                column: String::new(),
                value: e.to_string(),
            })?;
            out.push((line, value));
        }
        Ok(out)
    }
}

/// Read a serde-mapped table after confirming every required column exists.
pub(crate) fn read_table<T: DeserializeOwned>(path: &Path, required: &[&str]) -> Result<Vec<(u64, T)>, IngestError> {
    let table = CsvTable::open(path)?;
    table.columns(required)?;
    table.deserialize_all()
}

pub(crate) fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IngestError> {
    let file = file_label(path);
    let handle = File::create(path).map_err(|source| IngestError::Io { file: file.clone(), source })?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(handle));
    for row in rows {
        writer.serialize(row).map_err(|e| IngestError::Csv { file: file.clone(), message: e.to_string() })?;
    }
    writer.flush().map_err(|source| IngestError::Io { file, source })
}

pub(crate) fn create_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, IngestError> {
    let file = file_label(path);
    let handle = File::create(path).map_err(|source| IngestError::Io { file, source })?;
    Ok(csv::Writer::from_writer(BufWriter::new(handle)))
}

pub(crate) fn finish<W: Write>(path: &Path, mut writer: csv::Writer<W>) -> Result<(), IngestError> {
    writer.flush().map_err(|source| IngestError::Io { file: file_label(path), source })
}

pub(crate) fn field<'r>(file: &str, line: u64, record: &'r ByteRecord, idx: usize, column: &str) -> Result<&'r str, IngestError> {
    let raw = record.get(idx).unwrap_or_default();
    std::str::from_utf8(raw).map(str::trim).map_err(|_| IngestError::Parse {
        file: file.to_string(),
        row: line,
        column: column.to_string(),
        value: String::from_utf8_lossy(raw).into_owned(),
    })
}

pub(crate) fn parse_f64(file: &str, line: u64, column: &str, text: &str) -> Result<f64, IngestError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::Parse {
            file: file.to_string(),
            row: line,
            column: column.to_string(),
            value: text.to_string(),
        }),
    }
}

pub(crate) fn parse_date(file: &str, line: u64, column: &str, text: &str) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|_| IngestError::Parse {
        file: file.to_string(),
        row: line,
        column: column.to_string(),
        value: text.to_string(),
    })
}

fn digits(bytes: &[u8]) -> Option<u32> {
    let mut v = 0u32;
    for b in bytes {
        if !b.is_ascii_digit() {
            return None;
        }
        v = v * 10 + u32::from(b - b'0');
    }
    Some(v)
}

/// Parse `YYYY-MM-DDTHH:MM[:SS]` (a space separator is also accepted).
pub fn parse_timestamp(text: &str) -> Option<NaiveDateTime> {
    let b = text.as_bytes();
    if b.len() >= 16 && b[4] == b'-' && b[7] == b'-' && (b[10] == b'T' || b[10] == b' ') && b[13] == b':' {
        let year = digits(&b[0..4])? as i32;
        let month = digits(&b[5..7])?;
        let day = digits(&b[8..10])?;
        let hour = digits(&b[11..13])?;
        let minute = digits(&b[14..16])?;
        let second = if b.len() >= 19 && b[16] == b':' { digits(&b[17..19])? } else { 0 };
        return NaiveDate::from_ymd_opt(year, month, day)?.and_hms_opt(hour, minute, second);
    }
    None
}

pub(crate) fn parse_ts(file: &str, line: u64, column: &str, text: &str) -> Result<NaiveDateTime, IngestError> {
    parse_timestamp(text).ok_or_else(|| IngestError::Parse {
        file: file.to_string(),
        row: line,
        column: column.to_string(),
        value: text.to_string(),
    })
}

pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format("%Y-%m-%dT%H:%M:%S").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_formats() {
        let a = parse_timestamp("2015-06-01T13:00:00").unwrap();
        let b = parse_timestamp("2015-06-01 13:00").unwrap();
        assert_eq!(a, b);
        assert_eq!(format_timestamp(a), "2015-06-01T13:00:00");
        assert!(parse_timestamp("2015-13-01T00:00:00").is_none());
        assert!(parse_timestamp("garbage").is_none());
    }
}
