//! Anomaly likelihood.
//!
//! Raw scores are modelled as a rolling normal distribution over the last
//! `window` scores. The likelihood compares the short-term mean of the
//! last `short_window` scores against it:
//!
//! ```text
//! L_t = 1 - Q((short_mean - mean) / std)
//! ```
//!
//! and an anomaly is reported when `L_t >= 1 - epsilon`.

use serde::{Deserialize, Serialize};

use super::qfunc::q_function;
use super::rolling::RollingWindow;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LikelihoodConfig {
    /// Long window `W`, in records.
    pub window: usize,
    /// Short window `W'`, in records.
    pub short_window: usize,
    pub epsilon: f64,
    pub min_variance_floor: f64,
    /// Samples needed before the likelihood leaves 0.5.
    pub warmup_min: usize,
}

impl Default for LikelihoodConfig {
    fn default() -> Self {
        Self {
            window: 8000,
            short_window: 10,
            epsilon: 1e-5,
            min_variance_floor: 1e-4,
            warmup_min: 2,
        }
    }
}

impl LikelihoodConfig {
    pub fn validate(&self) -> Result<()> {
        if self.short_window == 0 || self.short_window > self.window / 10 {
            return Err(invalid("short_window", "must satisfy 0 < W' <= W/10"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must be in (0, 1)"));
        }
        if !(self.min_variance_floor > 0.0) {
            return Err(invalid("min_variance_floor", "must be > 0"));
        }
        if self.warmup_min < 2 {
            return Err(invalid("warmup_min", "must be >= 2"));
        }
        Ok(())
    }
}

/// Rolling score distribution at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    pub mean: f64,
    /// Floored variance used in the likelihood.
    pub variance: f64,
    /// Sample variance before flooring.
    pub raw_variance: f64,
    pub short_mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodOutput {
    pub likelihood: f64,
    /// `Q(deviation)`, kept separately so that tiny tails survive.
    pub tail_probability: f64,
    /// Signed `(short_mean - mean) / std`. Strongly negative values mark
    /// a switch from unpredictable to predictable, which is not flagged.
    pub deviation: f64,
    pub distribution: DistributionEstimate,
}

#[derive(Debug, Clone)]
pub struct AnomalyLikelihood {
    cfg: LikelihoodConfig,
    long: RollingWindow,
    short: RollingWindow,
}

impl AnomalyLikelihood {
    pub fn new(cfg: LikelihoodConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            long: RollingWindow::new(cfg.window),
            short: RollingWindow::new(cfg.short_window),
            cfg,
        })
    }

    pub fn config(&self) -> &LikelihoodConfig {
        &self.cfg
    }

    pub fn count(&self) -> usize {
        self.long.len()
    }

    pub fn update(&mut self, score: f64) -> Result<LikelihoodOutput> {
        if !score.is_finite() {
            return Err(Error::NonFiniteScore(score));
        }
        self.long.push(score);
        self.short.push(score);
        let raw_variance = self.long.variance();
        let distribution = DistributionEstimate {
            mean: self.long.mean(),
            variance: raw_variance.max(self.cfg.min_variance_floor),
            raw_variance,
            short_mean: self.short.mean(),
            count: self.long.len(),
        };
        if distribution.count < self.cfg.warmup_min {
            return Ok(LikelihoodOutput {
                likelihood: 0.5,
                tail_probability: 0.5,
                deviation: 0.0,
                distribution,
            });
        }
        let deviation = (distribution.short_mean - distribution.mean) / distribution.variance.sqrt();
        let tail = q_function(deviation);
        Ok(LikelihoodOutput {
            likelihood: 1.0 - tail,
            tail_probability: tail,
            deviation,
            distribution,
        })
    }

    pub fn is_anomaly(&self, likelihood: f64, in_probation: bool) -> bool {
        flag(likelihood, self.cfg.epsilon, in_probation)
    }
}

/// `L_t >= 1 - epsilon`, never during probation.
pub fn flag(likelihood: f64, epsilon: f64, in_probation: bool) -> bool {
    !in_probation && likelihood >= 1.0 - epsilon
}
