//! Window-based scoring with early-detection weighting.
//!
//! The first detection inside a window earns `tp_weight` scaled by a
//! sigmoid of its relative position in the window: near 1 at the window
//! start, small but positive at its end. Later detections in the same
//! window are ignored. Each detection outside every window costs
//! `fp_weight`; each window without a detection costs `fn_weight`.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::labels::Window;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationProfile {
    pub name: String,
    pub tp_weight: f64,
    pub fp_weight: f64,
    pub fn_weight: f64,
}

impl ApplicationProfile {
    pub fn new(name: &str, tp_weight: f64, fp_weight: f64, fn_weight: f64) -> Result<Self> {
        if !(tp_weight > 0.0 && fp_weight <= 0.0 && fn_weight <= 0.0) {
            return Err(invalid("profile", "need tp > 0, fp <= 0, fn <= 0"));
        }
        Ok(Self {
            name: name.to_string(),
            tp_weight,
            fp_weight,
            fn_weight,
        })
    }

    pub fn standard() -> Self {
        Self::new("standard", 1.0, -0.11, -1.0).expect("valid")
    }

    pub fn reward_low_fp() -> Self {
        Self::new("reward_low_fp", 1.0, -0.22, -1.0).expect("valid")
    }

    pub fn reward_low_fn() -> Self {
        Self::new("reward_low_fn", 1.0, -0.11, -2.0).expect("valid")
    }

    pub fn all() -> Vec<Self> {
        vec![Self::standard(), Self::reward_low_fp(), Self::reward_low_fn()]
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Self::all().into_iter().find(|p| p.name == name)
    }
}

/// Positional weight `1 / (1 + exp(-(offset - slope * relpos)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub slope: f64,
    pub offset: f64,
}

impl Default for Sigmoid {
    /// relpos 0 -> 0.9975, 0.5 -> 0.881, 1 -> 0.119
    fn default() -> Self {
        Self {
            slope: 8.0,
            offset: 6.0,
        }
    }
}

impl Sigmoid {
    pub fn weight(&self, relpos: f64) -> f64 {
        1.0 / (1.0 + (-(self.offset - self.slope * relpos)).exp())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamScore {
    pub raw: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Scores sorted `detections` against non-overlapping `windows`.
pub fn score_stream(
    detections: &[NaiveDateTime],
    windows: &[Window],
    profile: &ApplicationProfile,
    sigmoid: &Sigmoid,
) -> Result<StreamScore> {
    if detections.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::UnsortedDetections);
    }
    let mut hit = vec![false; windows.len()];
    let mut score = StreamScore::default();
    for &t in detections {
        match windows.iter().position(|w| w.contains(t)) {
            Some(i) if !hit[i] => {
                hit[i] = true;
                score.tp += 1;
                score.raw += profile.tp_weight * sigmoid.weight(windows[i].relative_position(t));
            }
            Some(_) => {}
            None => {
                score.fp += 1;
                score.raw += profile.fp_weight;
            }
        }
    }
    score.fn_ = hit.iter().filter(|&&h| !h).count();
    score.raw += score.fn_ as f64 * profile.fn_weight;
    Ok(score)
}

/// Maps a raw score onto the scale where the null detector is 0 and the
/// perfect detector 100.
pub fn normalize_corpus(raw: f64, perfect_raw: f64, null_raw: f64) -> Result<f64> {
    if !(perfect_raw > null_raw) {
        return Err(invalid("perfect_raw", "must exceed null_raw"));
    }
    Ok(100.0 * (raw - null_raw) / (perfect_raw - null_raw))
}

/// Raw score of the detector that fires exactly at every window start.
pub fn perfect_raw(windows: &[Window], profile: &ApplicationProfile, sigmoid: &Sigmoid) -> f64 {
    windows.len() as f64 * profile.tp_weight * sigmoid.weight(0.0)
}

/// Raw score of the detector that never fires.
pub fn null_raw(windows: &[Window], profile: &ApplicationProfile) -> f64 {
    windows.len() as f64 * profile.fn_weight
}
