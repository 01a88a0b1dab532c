//! Ground-truth anomaly windows.
//!
//! Label files map stream names to lists of `[start, end]` timestamp
//! pairs:
//!
//! ```json
//! {"machine_temperature.csv": [["2013-12-10 06:25:00", "2013-12-12 05:35:00"]]}
//! ```

use std::collections::BTreeMap;

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, parse_timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl Window {
    pub fn new(start: NaiveDateTime, end: NaiveDateTime) -> Result<Self> {
        if start >= end {
            return Err(Error::BadLabels(format!(
                "window start {start} is not before end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    /// Inclusive on both ends.
    pub fn contains(&self, t: NaiveDateTime) -> bool {
        self.start <= t && t <= self.end
    }

    /// 0 at the start, 1 at the end.
    pub fn relative_position(&self, t: NaiveDateTime) -> f64 {
        let span = (self.end - self.start).num_milliseconds() as f64;
        ((t - self.start).num_milliseconds() as f64 / span).clamp(0.0, 1.0)
    }
}

/// Windows for each stream, sorted and non-overlapping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    streams: BTreeMap<String, Vec<Window>>,
}

impl Labels {
    pub fn insert(&mut self, stream: &str, mut windows: Vec<Window>) -> Result<()> {
        windows.sort_by_key(|w| w.start);
        if windows.windows(2).any(|p| p[1].start <= p[0].end) {
            return Err(Error::BadLabels(format!("overlapping windows in `{stream}`")));
        }
        self.streams.insert(stream.to_string(), windows);
        Ok(())
    }

    pub fn windows(&self, stream: &str) -> &[Window] {
        self.streams.get(stream).map_or(&[], Vec::as_slice)
    }

    pub fn contains_stream(&self, stream: &str) -> bool {
        self.streams.contains_key(stream)
    }

    pub fn streams(&self) -> impl Iterator<Item = (&str, &[Window])> {
        self.streams.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<(String, String)>> =
            serde_json::from_str(json).map_err(|e| Error::BadLabels(e.to_string()))?;
        let mut labels = Labels::default();
        for (stream, pairs) in raw {
            let windows = pairs
                .iter()
                .map(|(a, b)| Window::new(parse_timestamp(a)?, parse_timestamp(b)?))
                .collect::<Result<Vec<_>>>()?;
            labels.insert(&stream, windows)?;
        }
        Ok(labels)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw: BTreeMap<&str, Vec<[String; 2]>> = self
            .streams
            .iter()
            .map(|(k, ws)| {
                let pairs = ws
                    .iter()
                    .map(|w| [format_timestamp(&w.start), format_timestamp(&w.end)])
                    .collect();
                (k.as_str(), pairs)
            })
            .collect();
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}
