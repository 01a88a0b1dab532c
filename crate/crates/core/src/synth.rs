//! Seeded synthetic streams with labeled anomaly windows.
//!
//! Records are five minutes apart starting at 2016-01-01 00:00:00. Each
//! labeled anomaly gets a window of `max(len / 10 / anomalies, 10)`
//! records centered on its onset, clipped to the stream.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bench::Window;
use crate::error::{invalid, Result};
use crate::ingest::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// Slow drift plus a periodic cycle; the cycle briefly runs at twice
    /// its usual rate while staying inside the normal value range.
    Temperature,
    /// Periodic waveform with small noise and one upward level shift.
    LevelShift,
    /// Noisy baseline with occasional spikes; the baseline and spike rate
    /// rise for good partway through.
    NoisySpikes,
    /// Periodic baseline with rare isolated spikes (normal) and one pair of
    /// consecutive spikes (anomalous).
    DoubleSpike,
    /// A fixed 24-step cycle of distinct levels; after 50 clean cycles one
    /// element arrives a step early.
    Cyclic,
    /// Unit Gaussian noise without anomalies.
    Noise,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::Temperature,
        Generator::LevelShift,
        Generator::NoisySpikes,
        Generator::DoubleSpike,
        Generator::Cyclic,
        Generator::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Temperature => "temperature",
            Generator::LevelShift => "level_shift",
            Generator::NoisySpikes => "noisy_spikes",
            Generator::DoubleSpike => "double_spike",
            Generator::Cyclic => "cyclic",
            Generator::Noise => "noise",
        }
    }

    pub fn default_len(self) -> usize {
        match self {
            Generator::Temperature => 4000,
            Generator::LevelShift => 5000,
            Generator::NoisySpikes => 4000,
            Generator::DoubleSpike => 4000,
            Generator::Cyclic => CYCLE * (CLEAN_CYCLES + 3),
            Generator::Noise => 50_000,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| invalid("generator", format!("unknown generator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthStream {
    pub records: Vec<Record>,
    pub windows: Vec<Window>,
    /// Record index where each labeled anomaly begins.
    pub onsets: Vec<usize>,
}

pub const CYCLE: usize = 24;
pub const CLEAN_CYCLES: usize = 50;

pub fn start_time() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2016, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

pub fn timestamp(i: usize) -> NaiveDateTime {
    start_time() + Duration::minutes(5 * i as i64)
}

/// Builds records from values at the standard spacing.
pub fn to_records(values: &[f64]) -> Vec<Record> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| Record {
            timestamp: timestamp(i),
            value: (v * 1000.0).round() / 1000.0,
        })
        .collect()
}

/// Generates a stream; `len` defaults to [`Generator::default_len`].
pub fn generate(gen: Generator, seed: u64, len: Option<usize>) -> Result<SynthStream> {
    let n = len.unwrap_or_else(|| gen.default_len());
    if n < 100 {
        return Err(invalid("len", "synthetic streams need at least 100 records"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (values, onsets) = match gen {
        Generator::Temperature => temperature(&mut rng, n),
        Generator::LevelShift => level_shift(&mut rng, n),
        Generator::NoisySpikes => noisy_spikes(&mut rng, n),
        Generator::DoubleSpike => double_spike(&mut rng, n),
        Generator::Cyclic => cyclic(&mut rng, n)?,
        Generator::Noise => (gaussian(&mut rng, n, 0.0, 1.0), vec![]),
    };
    let windows = label_windows(n, &onsets)?;
    Ok(SynthStream {
        records: to_records(&values),
        windows,
        onsets,
    })
}

fn label_windows(n: usize, onsets: &[usize]) -> Result<Vec<Window>> {
    if onsets.is_empty() {
        return Ok(vec![]);
    }
    let width = (n / 10 / onsets.len()).max(10);
    onsets
        .iter()
        .map(|&o| {
            let start = o.saturating_sub(width / 2);
            let end = (o + width / 2).min(n - 1);
            Window::new(timestamp(start), timestamp(end))
        })
        .collect()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, mean: f64, sd: f64) -> Vec<f64> {
    let d = Normal::new(mean, sd).expect("finite sd");
    (0..n).map(|_| d.sample(rng)).collect()
}

fn temperature(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<usize>) {
    const PERIOD: f64 = 48.0;
    let onset = n * 13 / 20;
    let fast_len = 2 * PERIOD as usize;
    let noise = gaussian(rng, n, 0.0, 0.3);
    let mut phase = 0.0;
    let values = (0..n)
        .map(|i| {
            let rate = if (onset..onset + fast_len).contains(&i) { 2.0 } else { 1.0 };
            let v = 70.0 + 2.0 * (TAU * i as f64 / n as f64).sin() + 8.0 * (TAU * phase).sin();
            phase = (phase + rate / PERIOD).fract();
            v + noise[i]
        })
        .collect();
    (values, vec![onset])
}

fn level_shift(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<usize>) {
    const PERIOD: f64 = 20.0;
    let onset = n * 3 / 5;
    let noise = gaussian(rng, n, 0.0, 0.1);
    let values = (0..n)
        .map(|i| {
            let shift = if i >= onset { 40.0 } else { 0.0 };
            50.0 + 10.0 * (TAU * i as f64 / PERIOD).sin() + shift + noise[i]
        })
        .collect();
    (values, vec![onset])
}

fn noisy_spikes(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<usize>) {
    let onset = n * 7 / 10;
    let noise = gaussian(rng, n, 0.0, 1.0);
    let values = (0..n)
        .map(|i| {
            let (base, rate) = if i >= onset { (32.0, 0.08) } else { (20.0, 0.01) };
            let spike = if rng.gen_bool(rate) { rng.gen_range(20.0..40.0) } else { 0.0 };
            (base + noise[i]).max(0.0) + spike
        })
        .collect();
    (values, vec![onset])
}

fn double_spike(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<usize>) {
    const PERIOD: f64 = 16.0;
    let onset = n * 3 / 4;
    let mut values: Vec<f64> = gaussian(rng, n, 0.0, 0.2)
        .into_iter()
        .enumerate()
        .map(|(i, e)| 20.0 + 5.0 * (TAU * i as f64 / PERIOD).sin() + e)
        .collect();
    let mut i = rng.gen_range(300..600);
    while i + 1 < n {
        if i + 20 < onset || i > onset + 20 {
            values[i] += 30.0;
        }
        i += rng.gen_range(400..700);
    }
    values[onset] += 30.0;
    values[onset + 1] += 30.0;
    (values, vec![onset])
}

fn cyclic(rng: &mut ChaCha8Rng, n: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    if n < CYCLE * (CLEAN_CYCLES + 1) {
        return Err(invalid("len", "cyclic needs at least 51 cycles"));
    }
    let mut levels: Vec<f64> = (0..CYCLE).map(|j| (j * 10) as f64).collect();
    levels.shuffle(rng);
    let mut values: Vec<f64> = (0..n).map(|i| levels[i % CYCLE]).collect();
    // The element at `onset + 1` arrives one step early.
    let onset = CYCLE * CLEAN_CYCLES + rng.gen_range(0..CYCLE - 1);
    values.swap(onset, onset + 1);
    Ok((values, vec![onset]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        for g in Generator::ALL {
            let a = generate(g, 5, Some(2000)).unwrap();
            assert_eq!(a, generate(g, 5, Some(2000)).unwrap(), "{g}");
            assert_eq!(a.records.len(), 2000);
            assert!(a.records.windows(2).all(|p| p[0].timestamp < p[1].timestamp));
        }
        assert_ne!(
            generate(Generator::Noise, 1, Some(200)).unwrap(),
            generate(Generator::Noise, 2, Some(200)).unwrap()
        );
    }

    #[test]
    fn names_round_trip() {
        for g in Generator::ALL {
            assert_eq!(g.name().parse::<Generator>().unwrap(), g);
        }
        assert!("sawtooth".parse::<Generator>().is_err());
    }

    #[test]
    fn level_shift_has_one_window_at_the_shift() {
        let s = generate(Generator::LevelShift, 0, None).unwrap();
        assert_eq!(s.windows.len(), 1);
        let t = s.records[s.onsets[0]].timestamp;
        assert!(s.windows[0].contains(t));
        let before: f64 = s.records[s.onsets[0] - 100..s.onsets[0]].iter().map(|r| r.value).sum();
        let after: f64 = s.records[s.onsets[0]..s.onsets[0] + 100].iter().map(|r| r.value).sum();
        assert!(after - before > 3000.0);
    }

    #[test]
    fn double_spike_labels_only_the_pair() {
        let s = generate(Generator::DoubleSpike, 3, None).unwrap();
        let spikes: Vec<usize> = (0..s.records.len())
            .filter(|&i| s.records[i].value > 40.0)
            .collect();
        assert!(spikes.len() >= 6);
        assert_eq!(s.windows.len(), 1);
        let o = s.onsets[0];
        assert!(spikes.contains(&o) && spikes.contains(&(o + 1)));
        for &i in &spikes {
            let paired = spikes.contains(&(i + 1)) || (i > 0 && spikes.contains(&(i - 1)));
            assert_eq!(paired, i == o || i == o + 1, "spike at {i}");
        }
    }

    #[test]
    fn cyclic_injection_is_out_of_order() {
        let s = generate(Generator::Cyclic, 9, None).unwrap();
        let o = s.onsets[0];
        assert_eq!(o / CYCLE, CLEAN_CYCLES);
        assert_eq!(s.records[o].value, s.records[o + 1 - CYCLE].value);
        assert_eq!(s.records[o + 1].value, s.records[o - CYCLE].value);
        for i in CYCLE..o {
            assert_eq!(s.records[i].value, s.records[i - CYCLE].value);
        }
        assert!(generate(Generator::Cyclic, 0, Some(1000)).is_err());
    }

    #[test]
    fn noise_is_unlabeled() {
        let s = generate(Generator::Noise, 0, Some(1000)).unwrap();
        assert!(s.windows.is_empty() && s.onsets.is_empty());
    }
}
