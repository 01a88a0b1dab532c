//! Single-model pipeline: encoder -> projection -> sequence memory ->
//! raw score -> likelihood -> flag.

use chrono::NaiveDateTime;
use serde::Serialize;

use super::config::PipelineConfig;
use super::record::{format_timestamp, Record, RowPolicy};
use crate::anomaly::{flag, raw_score, AnomalyLikelihood};
use crate::encoder::{mix64, RecordEncoder, ScalarEncoderConfig};
use crate::error::{Error, Result};
use crate::sdr::Sdr;
use crate::tm::{ColumnProjection, ProjectionConfig, TemporalMemory, TmConfig};

/// Provisional resolutions are only replaced when the calibrated value
/// grows by more than this factor.
const RECALIBRATE_RATIO: f64 = 2.0;

/// One output row per input record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnomalyOutput {
    pub timestamp: NaiveDateTime,
    pub value: f64,
    pub raw_score: f64,
    pub likelihood: f64,
    pub flag: bool,
    /// `Q` of the deviation; 0.5 while calibrating.
    pub tail_probability: f64,
    pub deviation: f64,
    pub in_probation: bool,
}

impl AnomalyOutput {
    /// `timestamp,value,raw_score,likelihood,flag`
    pub fn csv_fields(&self) -> [String; 5] {
        [
            format_timestamp(&self.timestamp),
            self.value.to_string(),
            self.raw_score.to_string(),
            self.likelihood.to_string(),
            u8::from(self.flag).to_string(),
        ]
    }
}

pub const OUTPUT_HEADER: [&str; 5] = ["timestamp", "value", "raw_score", "likelihood", "flag"];

pub struct Detector {
    cfg: PipelineConfig,
    scalar: ScalarEncoderConfig,
    resolution_fixed: bool,
    calibrated: bool,
    range: Option<(f64, f64)>,
    projection: ColumnProjection,
    tm: TemporalMemory,
    likelihood: AnomalyLikelihood,
    predicted: Sdr,
    probation: usize,
    seen: usize,
    last_timestamp: Option<NaiveDateTime>,
}

impl Detector {
    /// `known_len` is the stream length when known up front (files); it
    /// only sets the probation length.
    pub fn new(cfg: PipelineConfig, known_len: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.seed;
        let scalar = ScalarEncoderConfig {
            resolution: cfg.encoder.resolution.unwrap_or(cfg.encoder.min_resolution),
            active_bits: cfg.encoder.active_bits,
            width: cfg.encoder.width,
            seed,
        };
        let encoder = RecordEncoder::new(scalar, cfg.encoder.time)?;
        let projection = ColumnProjection::new(
            encoder.width(),
            cfg.tm.column_count,
            &ProjectionConfig {
                seed: mix64(seed ^ 0x5052_4f4a),
                ..cfg.projection
            },
        )?;
        let tm = TemporalMemory::new(TmConfig {
            seed: mix64(seed ^ 0x544d),
            ..cfg.tm.clone()
        })?;
        let likelihood = AnomalyLikelihood::new(cfg.likelihood)?;
        Ok(Self {
            probation: cfg.probation_len(known_len),
            resolution_fixed: cfg.encoder.resolution.is_some(),
            calibrated: false,
            range: None,
            predicted: Sdr::empty(cfg.tm.column_count),
            scalar,
            projection,
            tm,
            likelihood,
            seen: 0,
            last_timestamp: None,
            cfg,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn probation(&self) -> usize {
        self.probation
    }

    pub fn in_probation(&self) -> bool {
        self.seen < self.probation
    }

    pub fn records_seen(&self) -> usize {
        self.seen
    }

    /// Resolution currently used by the scalar encoder.
    pub fn resolution(&self) -> f64 {
        self.scalar.resolution
    }

    pub fn memory(&self) -> &TemporalMemory {
        &self.tm
    }

    fn calibrate(&mut self, value: f64) {
        let (lo, hi) = match self.range {
            Some((lo, hi)) => (lo.min(value), hi.max(value)),
            None => (value, value),
        };
        self.range = Some((lo, hi));
        let enc = &self.cfg.encoder;
        let candidate = ((hi - lo) / enc.auto_buckets).max(enc.min_resolution);
        if !self.calibrated || candidate > RECALIBRATE_RATIO * self.scalar.resolution {
            if self.calibrated {
                log::debug!(
                    "record {}: resolution {} -> {}",
                    self.seen,
                    self.scalar.resolution,
                    candidate
                );
            }
            self.scalar.resolution = candidate;
            self.calibrated = true;
        }
    }

    /// Consumes one record and produces its output row.
    pub fn process(&mut self, record: &Record) -> Result<AnomalyOutput> {
        if !record.value.is_finite() {
            return Err(Error::BadRecord(format!("non-finite value {}", record.value)));
        }
        if let Some(last) = self.last_timestamp {
            if record.timestamp < last {
                return Err(Error::NonMonotonic {
                    row: self.seen + 1,
                    timestamp: format_timestamp(&record.timestamp),
                });
            }
        }
        let in_probation = self.in_probation();
        if !self.resolution_fixed && in_probation {
            self.calibrate(record.value);
        }

        let encoder = RecordEncoder {
            scalar: self.scalar,
            time: self.cfg.encoder.time,
        };
        let enc = encoder.encode(record)?;
        let columns = self.projection.project(&enc)?;
        let out = self.tm.step(&columns, true)?;
        let raw = raw_score(&self.predicted, &columns)?;
        self.predicted = out.predicted_next;

        let (likelihood, tail, deviation) = if in_probation {
            (0.5, 0.5, 0.0)
        } else {
            let l = self.likelihood.update(raw)?;
            (l.likelihood, l.tail_probability, l.deviation)
        };
        self.seen += 1;
        self.last_timestamp = Some(record.timestamp);
        Ok(AnomalyOutput {
            timestamp: record.timestamp,
            value: record.value,
            raw_score: raw,
            likelihood,
            flag: flag(likelihood, self.cfg.likelihood.epsilon, in_probation),
            tail_probability: tail,
            deviation,
            in_probation,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamSummary {
    pub records: usize,
    pub flags: usize,
    /// Records rejected by the detector (out-of-order timestamps).
    pub rejected: usize,
}

/// Runs a record source through one detector, handing every output row to
/// `sink` before the next record is pulled.
pub fn run_stream<I, F>(
    source: I,
    cfg: &PipelineConfig,
    known_len: Option<usize>,
    mut sink: F,
) -> Result<StreamSummary>
where
    I: IntoIterator<Item = Result<Record>>,
    F: FnMut(&AnomalyOutput) -> Result<()>,
{
    let mut detector = Detector::new(cfg.clone(), known_len)?;
    let mut summary = StreamSummary::default();
    for record in source {
        let record = record?;
        match detector.process(&record) {
            Ok(out) => {
                summary.records += 1;
                summary.flags += usize::from(out.flag);
                sink(&out)?;
            }
            Err(e @ Error::NonMonotonic { .. }) if cfg.row_policy == RowPolicy::Skip => {
                log::warn!("skipping record: {e}");
                summary.rejected += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(summary)
}

/// Convenience wrapper for in-memory streams of known length.
pub fn detect_all(records: &[Record], cfg: &PipelineConfig) -> Result<Vec<AnomalyOutput>> {
    detect_with_length(records, cfg, records.len())
}

/// As [`detect_all`], with the probation sized for a stream of
/// `declared_len` records.
pub fn detect_with_length(
    records: &[Record],
    cfg: &PipelineConfig,
    declared_len: usize,
) -> Result<Vec<AnomalyOutput>> {
    let mut out = Vec::with_capacity(records.len());
    run_stream(
        records.iter().copied().map(Ok),
        cfg,
        Some(declared_len),
        |o| {
            out.push(*o);
            Ok(())
        },
    )?;
    Ok(out)
}
