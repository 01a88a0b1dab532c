//! Stream records and the `timestamp,value` CSV layout.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const OUTPUT_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// One stream element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub timestamp: NaiveDateTime,
    pub value: f64,
}

impl Record {
    pub fn new(timestamp: NaiveDateTime, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::BadRecord(format!("non-finite value {value}")));
        }
        Ok(Self { timestamp, value })
    }

    pub fn parse(timestamp: &str, value: f64) -> Result<Self> {
        Self::new(parse_timestamp(timestamp)?, value)
    }
}

/// Accepts `YYYY-MM-DD HH:MM:SS[.fff]`, the same with a `T` separator,
/// and RFC 3339 with an offset (converted to UTC).
pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    let s = s.trim();
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t);
        }
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.naive_utc());
    }
    if let Some(stripped) = s.strip_suffix('Z') {
        if let Ok(t) = NaiveDateTime::parse_from_str(stripped, "%Y-%m-%dT%H:%M:%S%.f") {
            return Ok(t);
        }
    }
    Err(Error::BadTimestamp(s.to_string()))
}

pub fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format(OUTPUT_FORMAT).to_string()
}

/// What to do with malformed rows and out-of-order timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowPolicy {
    /// Log a warning, count the row and continue.
    #[default]
    Skip,
    Fail,
}

/// Streaming reader over a `timestamp,value` CSV with a header row.
///
/// Rows are validated one at a time; under [`RowPolicy::Skip`] bad rows
/// are dropped and counted.
pub struct RecordReader<R: Read> {
    rows: csv::StringRecordsIntoIter<R>,
    policy: RowPolicy,
    row: usize,
    last: Option<NaiveDateTime>,
    skipped: usize,
}

impl<R: Read> RecordReader<R> {
    pub fn new(reader: R, policy: RowPolicy) -> Self {
        let rows = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader)
            .into_records();
        Self {
            rows,
            policy,
            row: 1,
            last: None,
            skipped: 0,
        }
    }

    /// Rows dropped so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    fn parse_row(&self, row: &csv::StringRecord) -> Result<Record> {
        if row.len() < 2 {
            return Err(Error::BadRecord(format!("row {}: expected 2 fields", self.row)));
        }
        let value: f64 = row[1]
            .parse()
            .map_err(|_| Error::BadRecord(format!("row {}: bad value `{}`", self.row, &row[1])))?;
        let record = Record::parse(&row[0], value)
            .map_err(|e| Error::BadRecord(format!("row {}: {e}", self.row)))?;
        if let Some(last) = self.last {
            if record.timestamp < last {
                return Err(Error::NonMonotonic {
                    row: self.row,
                    timestamp: row[0].to_string(),
                });
            }
        }
        Ok(record)
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let row = self.rows.next()?;
            self.row += 1;
            let parsed = row.map_err(Error::from).and_then(|r| self.parse_row(&r));
            match parsed {
                Ok(record) => {
                    self.last = Some(record.timestamp);
                    return Some(Ok(record));
                }
                Err(e) if self.policy == RowPolicy::Skip && !matches!(e, Error::Io(_)) => {
                    log::warn!("skipping row: {e}");
                    self.skipped += 1;
                }
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Reads a whole CSV, applying `policy`.
pub fn read_records<R: Read>(reader: R, policy: RowPolicy) -> Result<Vec<Record>> {
    RecordReader::new(reader, policy).collect()
}

pub fn write_records<W: Write>(writer: W, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "value"])?;
    for r in records {
        w.write_record([format_timestamp(&r.timestamp), r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_formats() {
        let a = parse_timestamp("2014-02-19 10:50:00").unwrap();
        assert_eq!(parse_timestamp("2014-02-19T10:50:00").unwrap(), a);
        assert_eq!(parse_timestamp("2014-02-19 10:50:00.000000").unwrap(), a);
        assert_eq!(parse_timestamp("2014-02-19T10:50:00Z").unwrap(), a);
        assert_eq!(parse_timestamp("2014-02-19T11:50:00+01:00").unwrap(), a);
        assert_eq!(format_timestamp(&a), "2014-02-19 10:50:00");
        assert!(parse_timestamp("yesterday").is_err());
    }

    #[test]
    fn skip_policy_counts_bad_rows() {
        let csv = "timestamp,value\n\
                   2014-01-01 00:00:00,1\n\
                   garbage,2\n\
                   2014-01-01 00:05:00,abc\n\
                   2013-12-31 00:00:00,4\n\
                   2014-01-01 00:10:00,5\n";
        let mut reader = RecordReader::new(csv.as_bytes(), RowPolicy::Skip);
        let got: Vec<f64> = reader.by_ref().map(|r| r.unwrap().value).collect();
        assert_eq!(got, vec![1.0, 5.0]);
        assert_eq!(reader.skipped(), 3);
    }

    #[test]
    fn fail_policy_stops() {
        let csv = "timestamp,value\n2014-01-01 00:05:00,1\n2014-01-01 00:00:00,2\n";
        let err = read_records(csv.as_bytes(), RowPolicy::Fail).unwrap_err();
        assert!(matches!(err, Error::NonMonotonic { row: 3, .. }));
        let csv = "timestamp,value\n2014-01-01 00:05:00,nan\n";
        assert!(read_records(csv.as_bytes(), RowPolicy::Fail).is_err());
    }

    #[test]
    fn empty_input() {
        assert!(read_records("timestamp,value\n".as_bytes(), RowPolicy::Fail)
            .unwrap()
            .is_empty());
        assert!(read_records("".as_bytes(), RowPolicy::Fail).unwrap().is_empty());
    }

    #[test]
    fn write_then_read() {
        let recs = vec![
            Record::parse("2014-01-01 00:00:00", 1.5).unwrap(),
            Record::parse("2014-01-01 00:05:00", -2.25).unwrap(),
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        assert_eq!(read_records(&buf[..], RowPolicy::Fail).unwrap(), recs);
    }
}
