//! JSON pipeline configuration. Every field is optional.

use serde::{Deserialize, Serialize};

use crate::anomaly::LikelihoodConfig;
use crate::encoder::TimeEncoderConfig;
use crate::error::{invalid, Result};
use crate::multi::MultiConfig;
use crate::tm::{ProjectionConfig, TmConfig};

use super::record::RowPolicy;

/// Scalar encoder settings. With no fixed `resolution` it is calibrated
/// from the probation records as `range / auto_buckets`, floored at
/// `min_resolution`, then frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderSettings {
    pub width: u32,
    pub active_bits: u32,
    pub resolution: Option<f64>,
    pub min_resolution: f64,
    pub auto_buckets: f64,
    pub time: TimeEncoderConfig,
}

impl Default for EncoderSettings {
    fn default() -> Self {
        Self {
            width: 2048,
            active_bits: 40,
            resolution: None,
            min_resolution: 0.001,
            auto_buckets: 130.0,
            time: TimeEncoderConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub encoder: EncoderSettings,
    pub projection: ProjectionConfig,
    pub tm: TmConfig,
    pub likelihood: LikelihoodConfig,
    /// Used by the multi-model runner only.
    pub multi: MultiConfig,
    pub probation_fraction: f64,
    pub probation_cap: usize,
    /// Overrides the computed probation length.
    pub probation_records: Option<usize>,
    /// Master seed; encoder, projection and memory seeds derive from it.
    pub seed: u64,
    pub row_policy: RowPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderSettings::default(),
            projection: ProjectionConfig::default(),
            tm: TmConfig::default(),
            likelihood: LikelihoodConfig::default(),
            multi: MultiConfig::default(),
            probation_fraction: 0.15,
            probation_cap: 750,
            probation_records: None,
            seed: 42,
            row_policy: RowPolicy::Skip,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.probation_fraction) {
            return Err(invalid("probation_fraction", "must be in [0, 1)"));
        }
        let e = &self.encoder;
        if e.active_bits == 0 || e.active_bits >= e.width {
            return Err(invalid("encoder.active_bits", "must satisfy 0 < w < n"));
        }
        if let Some(r) = e.resolution {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("encoder.resolution", "must be > 0"));
            }
        }
        if !(e.min_resolution > 0.0) || !(e.auto_buckets > 0.0) {
            return Err(invalid("encoder.min_resolution", "must be > 0"));
        }
        e.time.validate()?;
        self.tm.validate()?;
        self.likelihood.validate()?;
        self.multi.validate()?;
        Ok(())
    }

    /// Probation length for a stream of `known_len` records, or for an
    /// unbounded stream when `None`.
    pub fn probation_len(&self, known_len: Option<usize>) -> usize {
        if let Some(n) = self.probation_records {
            return n;
        }
        match known_len {
            Some(n) => ((self.probation_fraction * n as f64).ceil() as usize).min(self.probation_cap),
            None => self.probation_cap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_gives_defaults() {
        let cfg = PipelineConfig::from_json("{}").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.likelihood.window, 8000);
        assert_eq!(cfg.likelihood.short_window, 10);
        assert_eq!(cfg.likelihood.epsilon, 1e-5);
        assert_eq!(cfg.multi.sigma, 6.0);
    }

    #[test]
    fn partial_override() {
        let cfg = PipelineConfig::from_json(
            r#"{"likelihood": {"epsilon": 0.01}, "tm": {"cells_per_column": 8}, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.likelihood.epsilon, 0.01);
        assert_eq!(cfg.likelihood.window, 8000);
        assert_eq!(cfg.tm.cells_per_column, 8);
        assert_eq!(cfg.tm.column_count, 2048);
        assert_eq!(cfg.seed, 7);
        let again = PipelineConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_invalid() {
        assert!(PipelineConfig::from_json(r#"{"probation_fraction": 1.0}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"likelihood": {"epsilon": 2}}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"tm": {"cells_per_column": 0}}"#).is_err());
        assert!(PipelineConfig::from_json("not json").is_err());
    }

    #[test]
    fn probation_lengths() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.probation_len(Some(1000)), 150);
        assert_eq!(cfg.probation_len(Some(1001)), 151);
        assert_eq!(cfg.probation_len(Some(100_000)), 750);
        assert_eq!(cfg.probation_len(None), 750);
        assert_eq!(cfg.probation_len(Some(0)), 0);
    }
}
