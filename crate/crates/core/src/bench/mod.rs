//! Scoring harness: labeled windows, application profiles, baseline
//! detectors and corpus runs.

mod baselines;
mod corpus;
mod labels;
mod scoring;

pub use baselines::{baseline_random, baseline_sliding_threshold, ThresholdConfig};
pub use corpus::{
    detections, format_table, load_corpus_dir, run_corpus, write_csv, BenchOptions, CorpusStream,
    DetectorSpec, ScoreReport,
};
pub use labels::{Labels, Window};
pub use scoring::{
    normalize_corpus, null_raw, perfect_raw, score_stream, ApplicationProfile, Sigmoid,
    StreamScore,
};
