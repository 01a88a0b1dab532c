//! Combining the tail probabilities of several independent models.
//!
//! Each model publishes `q_t = Q((short_mean - mean) / std)` per step.
//! Every channel is smoothed with a causal half-normal kernel over its
//! last `K + 1` values, and the smoothed tails are multiplied under an
//! independence assumption:
//!
//! ```text
//! L_t = 1 - prod_i sum_j w_j q^i_{t-j}
//! ```
//!
//! The product is evaluated as a sum of logs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tail probability of a channel with no signal.
pub const NEUTRAL_Q: f64 = 0.5;

/// Lower clamp applied before taking logs.
pub const MIN_TAIL: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiConfig {
    /// Kernel width in steps.
    pub sigma: f64,
    pub epsilon: f64,
    /// Number of past lags the kernel reaches. Zero disables smoothing.
    pub kernel_span: usize,
}

impl Default for MultiConfig {
    fn default() -> Self {
        Self {
            sigma: 6.0,
            epsilon: 1e-5,
            kernel_span: 24,
        }
    }
}

impl MultiConfig {
    /// Kernel truncated at `ceil(4 sigma)`.
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            kernel_span: (4.0 * sigma).ceil() as usize,
            ..Self::default()
        }
    }

    /// No temporal smoothing: the combiner sees only the current step.
    pub fn unsmoothed() -> Self {
        Self {
            kernel_span: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", "must be > 0"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must be in (0, 1)"));
        }
        if self.kernel_span != 0 && (self.kernel_span as f64) < (3.0 * self.sigma).ceil() {
            return Err(invalid("kernel_span", "must be 0 or >= ceil(3 sigma)"));
        }
        Ok(())
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
}

/// Sum of the doubled Gaussian over lags `0..=k`, before normalization.
pub fn kernel_mass(sigma: f64, k: usize) -> f64 {
    (0..=k).map(|j| 2.0 * gaussian(j as f64, sigma)).sum()
}

/// Half-normal weights `2 G(j; sigma)` for lags `j = 0..=k`, normalized
/// to sum to one. Only past lags are used.
pub fn kernel_weights(sigma: f64, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..=k).map(|j| 2.0 * gaussian(j as f64, sigma)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Recent tail probabilities of one model, newest first.
#[derive(Debug, Clone)]
pub struct ModelChannel {
    recent: VecDeque<f64>,
    span: usize,
}

impl ModelChannel {
    /// A channel remembering `span + 1` steps, initially neutral.
    pub fn new(span: usize) -> Self {
        Self {
            recent: std::iter::repeat_n(NEUTRAL_Q, span + 1).collect(),
            span,
        }
    }

    pub fn push(&mut self, q: f64) {
        let q = if q.is_nan() { NEUTRAL_Q } else { q.clamp(MIN_TAIL, 1.0) };
        self.recent.push_front(q);
        self.recent.truncate(self.span + 1);
    }

    /// Value `lag` steps ago.
    pub fn at(&self, lag: usize) -> f64 {
        self.recent.get(lag).copied().unwrap_or(NEUTRAL_Q)
    }

    pub fn smoothed(&self, weights: &[f64]) -> f64 {
        weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * self.at(j))
            .sum()
    }
}

/// System likelihood and the smoothed per-channel tails behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    pub smoothed: Vec<f64>,
    pub log_tail: f64,
    pub likelihood: f64,
}

/// Combines the current state of `channels` into one likelihood.
pub fn combined_likelihood(channels: &[ModelChannel], weights: &[f64]) -> Result<Combined> {
    if channels.is_empty() {
        return Err(Error::NoModels);
    }
    let smoothed: Vec<f64> = channels.iter().map(|c| c.smoothed(weights)).collect();
    let log_tail: f64 = smoothed.iter().map(|s| s.max(MIN_TAIL).ln()).sum();
    Ok(Combined {
        likelihood: 1.0 - log_tail.exp(),
        smoothed,
        log_tail,
    })
}

pub fn multi_flag(likelihood: f64, cfg: &MultiConfig) -> bool {
    likelihood >= 1.0 - cfg.epsilon
}

/// Per-step combiner over a fixed set of channels.
#[derive(Debug, Clone)]
pub struct MultiCombiner {
    cfg: MultiConfig,
    weights: Vec<f64>,
    channels: Vec<ModelChannel>,
}

impl MultiCombiner {
    pub fn new(models: usize, cfg: MultiConfig) -> Result<Self> {
        cfg.validate()?;
        if models == 0 {
            return Err(Error::NoModels);
        }
        let weights = kernel_weights(cfg.sigma, cfg.kernel_span);
        log::debug!(
            "kernel sigma={} span={} pre-normalization mass={:.6}",
            cfg.sigma,
            cfg.kernel_span,
            kernel_mass(cfg.sigma, cfg.kernel_span)
        );
        Ok(Self {
            weights,
            channels: vec![ModelChannel::new(cfg.kernel_span); models],
            cfg,
        })
    }

    pub fn config(&self) -> &MultiConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn models(&self) -> usize {
        self.channels.len()
    }

    /// Publishes one step; `None` pads the channel with the neutral value.
    pub fn step(&mut self, qs: &[Option<f64>]) -> Result<(Combined, bool)> {
        if qs.len() != self.channels.len() {
            return Err(invalid("models", "one value per channel is required"));
        }
        for (c, q) in self.channels.iter_mut().zip(qs) {
            c.push(q.unwrap_or(NEUTRAL_Q));
        }
        let combined = combined_likelihood(&self.channels, &self.weights)?;
        let flag = multi_flag(combined.likelihood, &self.cfg);
        Ok((combined, flag))
    }
}
