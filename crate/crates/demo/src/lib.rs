//! WebAssembly bindings for the browser demo in `www/`.

use htmad_core::ingest::{detect_all, PipelineConfig};
use htmad_core::multi::{self, MultiCombiner, MultiConfig};
use htmad_core::synth::{generate, Generator};
use wasm_bindgen::prelude::*;

fn js_err(e: htmad_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Scores for one synthetic stream.
#[wasm_bindgen]
pub struct DetectRun {
    values: Vec<f64>,
    scores: Vec<f64>,
    likelihoods: Vec<f64>,
    flags: Vec<u32>,
    onsets: Vec<u32>,
    probation: usize,
}

#[wasm_bindgen]
impl DetectRun {
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn scores(&self) -> Vec<f64> {
        self.scores.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn likelihoods(&self) -> Vec<f64> {
        self.likelihoods.clone()
    }

    /// Indices of flagged records.
    #[wasm_bindgen(getter)]
    pub fn flags(&self) -> Vec<u32> {
        self.flags.clone()
    }

    /// Indices where labeled anomalies begin.
    #[wasm_bindgen(getter)]
    pub fn onsets(&self) -> Vec<u32> {
        self.onsets.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn probation(&self) -> usize {
        self.probation
    }
}

/// Generates a synthetic stream and runs the detector over it.
#[wasm_bindgen]
pub fn detect_synthetic(generator: &str, seed: u64, len: usize, epsilon: f64) -> Result<DetectRun, JsError> {
    let gen: Generator = generator.parse().map_err(js_err)?;
    let stream = generate(gen, seed, Some(len)).map_err(js_err)?;
    let mut cfg = PipelineConfig::default();
    cfg.likelihood.epsilon = epsilon;
    cfg.validate().map_err(js_err)?;
    let out = detect_all(&stream.records, &cfg).map_err(js_err)?;
    Ok(DetectRun {
        values: out.iter().map(|o| o.value).collect(),
        scores: out.iter().map(|o| o.raw_score).collect(),
        likelihoods: out.iter().map(|o| o.likelihood).collect(),
        flags: (0..out.len() as u32).filter(|&i| out[i as usize].flag).collect(),
        onsets: stream.onsets.iter().map(|&i| i as u32).collect(),
        probation: cfg.probation_len(Some(len)),
    })
}

/// Normalized smoothing weights for lags `0..=ceil(4 sigma)`.
#[wasm_bindgen]
pub fn kernel_weights(sigma: f64) -> Result<Vec<f64>, JsError> {
    let cfg = MultiConfig::with_sigma(sigma);
    cfg.validate().map_err(js_err)?;
    Ok(multi::kernel_weights(cfg.sigma, cfg.kernel_span))
}

/// Two channels that each dip to tail probability `depth` for `width`
/// steps, the second starting `offset` steps after the first. Returns
/// `log10(1 - L)` of the combined likelihood per step.
#[wasm_bindgen]
pub fn combine_dips(offset: usize, depth: f64, width: usize, sigma: f64) -> Result<Vec<f64>, JsError> {
    if !(depth > 0.0 && depth <= 1.0) {
        return Err(JsError::new("depth must be in (0, 1]"));
    }
    let mut m = MultiCombiner::new(2, MultiConfig::with_sigma(sigma)).map_err(js_err)?;
    let start = 20;
    let steps = start + offset + width + m.config().kernel_span + 20;
    let dip = |t: usize, from: usize| {
        if (from..from + width).contains(&t) {
            depth
        } else {
            multi::NEUTRAL_Q
        }
    };
    (0..steps)
        .map(|t| {
            let (c, _) = m
                .step(&[Some(dip(t, start)), Some(dip(t, start + offset))])
                .map_err(js_err)?;
            Ok(c.log_tail / std::f64::consts::LN_10)
        })
        .collect()
}
