//! Reference detectors for the benchmark.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anomaly::RollingWindow;
use crate::error::{invalid, Result};
use crate::ingest::Record;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    /// Trailing window length; the current value is not part of it.
    pub window: usize,
    /// Flag when `x > mean + c * std`.
    pub c: f64,
    /// Floor applied to the trailing standard deviation.
    pub min_std: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            window: 100,
            c: 3.0,
            min_std: 1e-6,
        }
    }
}

/// Flags values above `mean + c * std` of the trailing window. Nothing is
/// flagged until the window is full.
pub fn baseline_sliding_threshold(records: &[Record], cfg: &ThresholdConfig) -> Result<Vec<bool>> {
    if cfg.window < 2 || !(cfg.c > 0.0) || !(cfg.min_std > 0.0) {
        return Err(invalid("threshold", "need window >= 2, c > 0, min_std > 0"));
    }
    let mut win = RollingWindow::new(cfg.window);
    let mut flags = Vec::with_capacity(records.len());
    for r in records {
        let fire = win.len() == cfg.window && {
            let std = win.variance().sqrt().max(cfg.min_std);
            r.value > win.mean() + cfg.c * std
        };
        flags.push(fire);
        win.push(r.value);
    }
    Ok(flags)
}

/// Flags each record independently with probability `rate`.
pub fn baseline_random(len: usize, rate: f64, seed: u64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(invalid("rate", "must be in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..len).map(|_| rng.gen_bool(rate)).collect())
}
