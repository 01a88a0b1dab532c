//! Record encoders.
//!
//! Scalars use a random-hash bucket scheme: the value is quantized to a
//! bucket `b` and bucket `b` activates the bits `hash(seed, b + j) mod n`
//! for `j in 0..w`. Neighbouring buckets therefore share `w - 1` hash
//! keys, and the value range is unbounded. Time fields use cyclic
//! contiguous blocks so that records a period apart encode identically.

use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ingest::Record;
use crate::sdr::Sdr;

/// SplitMix64 finalizer. Fixed; all encodings depend on it.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn bit_hash(seed: u64, key: i64, attempt: u32) -> u64 {
    let h = mix64(mix64(seed).wrapping_add(key as u64));
    if attempt == 0 {
        h
    } else {
        mix64(h ^ (attempt as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarEncoderConfig {
    /// Value units per bucket.
    pub resolution: f64,
    pub active_bits: u32,
    pub width: u32,
    pub seed: u64,
}

impl Default for ScalarEncoderConfig {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            active_bits: 40,
            width: 2048,
            seed: 42,
        }
    }
}

impl ScalarEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(invalid("resolution", "must be finite and > 0"));
        }
        if self.active_bits == 0 || self.active_bits >= self.width {
            return Err(invalid("active_bits", "must satisfy 0 < w < n"));
        }
        Ok(())
    }

    pub fn bucket(&self, value: f64) -> i64 {
        (value / self.resolution).floor() as i64
    }
}

/// Encodes a finite scalar.
pub fn encode_scalar(cfg: &ScalarEncoderConfig, value: f64) -> Result<Sdr> {
    if !value.is_finite() {
        return Err(Error::BadRecord(format!("non-finite value {value}")));
    }
    Ok(encode_bucket(cfg, cfg.bucket(value)))
}

pub(crate) fn encode_bucket(cfg: &ScalarEncoderConfig, bucket: i64) -> Sdr {
    let n = cfg.width as u64;
    let mut bits: Vec<u32> = Vec::with_capacity(cfg.active_bits as usize);
    for j in 0..cfg.active_bits as i64 {
        let key = bucket.wrapping_add(j);
        let mut attempt = 0;
        loop {
            let bit = (bit_hash(cfg.seed, key, attempt) % n) as u32;
            if !bits.contains(&bit) {
                bits.push(bit);
                break;
            }
            attempt += 1;
        }
    }
    bits.sort_unstable();
    Sdr::from_sorted_unchecked(cfg.width, bits)
}

/// A periodic subfield encoded as a contiguous block that wraps around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicFieldConfig {
    pub width: u32,
    pub active_bits: u32,
}

impl CyclicFieldConfig {
    fn validate(&self, name: &'static str) -> Result<()> {
        if self.active_bits == 0 || self.width < self.active_bits {
            return Err(invalid(name, "subfield width must be >= active_bits > 0"));
        }
        Ok(())
    }

    /// `phase` in [0, 1).
    fn encode(&self, phase: f64) -> Sdr {
        let start = ((phase * self.width as f64).floor() as u32).min(self.width - 1);
        let mut bits: Vec<u32> = (0..self.active_bits)
            .map(|j| (start + j) % self.width)
            .collect();
        bits.sort_unstable();
        Sdr::from_sorted_unchecked(self.width, bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TimeEncoderConfig {
    pub time_of_day: Option<CyclicFieldConfig>,
    pub day_of_week: Option<CyclicFieldConfig>,
}

impl TimeEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = &self.time_of_day {
            f.validate("time_of_day")?;
        }
        if let Some(f) = &self.day_of_week {
            f.validate("day_of_week")?;
        }
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.time_of_day.map_or(0, |f| f.width) + self.day_of_week.map_or(0, |f| f.width)
    }
}

/// Scalar plus optional time subfields, concatenated in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordEncoder {
    pub scalar: ScalarEncoderConfig,
    pub time: TimeEncoderConfig,
}

impl RecordEncoder {
    pub fn new(scalar: ScalarEncoderConfig, time: TimeEncoderConfig) -> Result<Self> {
        scalar.validate()?;
        time.validate()?;
        Ok(Self { scalar, time })
    }

    pub fn width(&self) -> u32 {
        self.scalar.width + self.time.width()
    }

    pub fn active_bits(&self) -> u32 {
        self.scalar.active_bits
            + self.time.time_of_day.map_or(0, |f| f.active_bits)
            + self.time.day_of_week.map_or(0, |f| f.active_bits)
    }

    pub fn encode(&self, record: &Record) -> Result<Sdr> {
        let scalar = encode_scalar(&self.scalar, record.value)?;
        if self.time.width() == 0 {
            return Ok(scalar);
        }
        let ts = record.timestamp;
        let day_secs = ts.num_seconds_from_midnight() as f64 / 86_400.0;
        let mut parts = vec![scalar];
        if let Some(f) = &self.time.time_of_day {
            parts.push(f.encode(day_secs));
        }
        if let Some(f) = &self.time.day_of_week {
            let weekday = ts.weekday().num_days_from_monday() as f64;
            parts.push(f.encode((weekday + day_secs) / 7.0));
        }
        Ok(Sdr::concat(&parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScalarEncoderConfig {
        ScalarEncoderConfig {
            resolution: 0.1,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_quantized() {
        let c = cfg();
        assert_eq!(encode_scalar(&c, 3.7).unwrap(), encode_scalar(&c, 3.7).unwrap());
        assert_eq!(encode_scalar(&c, 1.01).unwrap(), encode_scalar(&c, 1.02).unwrap());
        assert_eq!(encode_scalar(&c, 1.01).unwrap().len(), 40);
        assert!(encode_scalar(&c, f64::NAN).is_err());
        assert!(encode_scalar(&c, f64::INFINITY).is_err());
    }

    /// Collisions among the hash keys of one bucket, counted independently
    /// of the encoder: keys whose first-attempt bit was already taken.
    fn first_attempt_collisions(c: &ScalarEncoderConfig, bucket: i64) -> usize {
        let mut seen = std::collections::HashSet::new();
        (0..c.active_bits as i64)
            .filter(|j| !seen.insert(bit_hash(c.seed, bucket + j, 0) % c.width as u64))
            .count()
    }

    #[test]
    fn adjacent_buckets_share_all_but_one_key() {
        let c = cfg();
        for b in 0..100i64 {
            let a = encode_bucket(&c, b);
            let next = encode_bucket(&c, b + 1);
            let noise = first_attempt_collisions(&c, b) + first_attempt_collisions(&c, b + 1);
            let ov = a.overlap(&next).unwrap();
            assert!(
                ov + 1 + noise >= c.active_bits as usize,
                "bucket {b}: overlap {ov}, collisions {noise}"
            );
        }
    }

    #[test]
    fn overlap_falls_with_bucket_gap() {
        let c = cfg();
        for b in 0..50i64 {
            let base = encode_bucket(&c, b);
            let overlaps: Vec<usize> = (0..=10)
                .map(|g| base.overlap(&encode_bucket(&c, b + g)).unwrap())
                .collect();
            for g in 0..=10usize {
                // w - g shared keys, give or take hash collisions.
                let expect = 40 - g;
                assert!(overlaps[g].abs_diff(expect) <= 3, "b={b} g={g} {overlaps:?}");
            }
            assert!(overlaps[10] < overlaps[0]);
        }
    }

    #[test]
    fn far_buckets_barely_overlap() {
        let c = cfg();
        let a = encode_bucket(&c, 0);
        let b = encode_bucket(&c, 1000);
        assert!(a.overlap(&b).unwrap() < 10);
    }

    #[test]
    fn negative_values_encode() {
        let c = cfg();
        let a = encode_scalar(&c, -5.0).unwrap();
        assert_eq!(a.len(), 40);
        assert_ne!(a, encode_scalar(&c, 5.0).unwrap());
    }

    fn record(ts: &str, v: f64) -> Record {
        Record::parse(ts, v).unwrap()
    }

    #[test]
    fn time_disabled_is_scalar_only() {
        let enc = RecordEncoder::new(cfg(), TimeEncoderConfig::default()).unwrap();
        let r = record("2016-02-04 09:30:00", 12.3);
        assert_eq!(enc.encode(&r).unwrap(), encode_scalar(&cfg(), 12.3).unwrap());
        assert_eq!(enc.width(), 2048);
    }

    #[test]
    fn time_of_day_is_periodic() {
        let time = TimeEncoderConfig {
            time_of_day: Some(CyclicFieldConfig {
                width: 200,
                active_bits: 21,
            }),
            day_of_week: None,
        };
        let enc = RecordEncoder::new(cfg(), time).unwrap();
        let a = enc.encode(&record("2016-02-04 09:30:00", 7.0)).unwrap();
        let b = enc.encode(&record("2016-02-05 09:30:00", 7.0)).unwrap();
        let c = enc.encode(&record("2016-02-05 21:30:00", 7.0)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.width(), 2248);
        assert_eq!(a.len(), 61);
    }

    #[test]
    fn day_of_week_wraps() {
        let time = TimeEncoderConfig {
            time_of_day: None,
            day_of_week: Some(CyclicFieldConfig {
                width: 70,
                active_bits: 10,
            }),
        };
        let enc = RecordEncoder::new(cfg(), time).unwrap();
        let mon = enc.encode(&record("2016-02-01 00:00:00", 1.0)).unwrap();
        let next_mon = enc.encode(&record("2016-02-08 00:00:00", 1.0)).unwrap();
        let sun = enc.encode(&record("2016-02-07 23:00:00", 1.0)).unwrap();
        assert_eq!(mon, next_mon);
        assert_eq!(sun.len(), 50);
        // Sunday night wraps to touch Monday's block.
        assert!(sun.overlap(&mon).unwrap() > 40);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = cfg();
        c.resolution = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.active_bits = c.width;
        assert!(c.validate().is_err());
        let bad = TimeEncoderConfig {
            time_of_day: Some(CyclicFieldConfig {
                width: 5,
                active_bits: 6,
            }),
            day_of_week: None,
        };
        assert!(RecordEncoder::new(cfg(), bad).is_err());
    }
}
