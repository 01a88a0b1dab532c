//! Corpus runs: every detector on every stream, scored per profile.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use chrono::NaiveDateTime;
use serde::Serialize;

use super::baselines::{baseline_random, baseline_sliding_threshold, ThresholdConfig};
use super::labels::{Labels, Window};
use super::scoring::{
    normalize_corpus, null_raw, perfect_raw, score_stream, ApplicationProfile, Sigmoid,
    StreamScore,
};
use crate::encoder::mix64;
use crate::error::{invalid, Error, Result};
use crate::ingest::{detect_all, read_records, PipelineConfig, Record, RowPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStream {
    /// Path relative to the corpus root with `/` separators; the key used
    /// in the labels file.
    pub name: String,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    Htm(PipelineConfig),
    Threshold(ThresholdConfig),
    Random { rate: f64, seed: u64 },
    /// Fires on the first record of every labeled window.
    Perfect,
    /// Never fires.
    Null,
}

impl DetectorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorSpec::Htm(_) => "htm",
            DetectorSpec::Threshold(_) => "sliding_threshold",
            DetectorSpec::Random { .. } => "random",
            DetectorSpec::Perfect => "perfect",
            DetectorSpec::Null => "null",
        }
    }

    /// `htm`, `threshold`, `random`, `perfect` or `null` with default
    /// settings.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "htm" => Ok(DetectorSpec::Htm(PipelineConfig::default())),
            "threshold" | "sliding_threshold" => Ok(DetectorSpec::Threshold(Default::default())),
            "random" => Ok(DetectorSpec::Random {
                rate: 0.01,
                seed: 42,
            }),
            "perfect" => Ok(DetectorSpec::Perfect),
            "null" => Ok(DetectorSpec::Null),
            _ => Err(invalid("detector", format!("unknown detector `{name}`"))),
        }
    }

    /// One flag per record. Only `Perfect` looks at `windows`.
    pub fn flags(&self, stream: &CorpusStream, windows: &[Window]) -> Result<Vec<bool>> {
        match self {
            DetectorSpec::Htm(cfg) => {
                Ok(detect_all(&stream.records, cfg)?.iter().map(|o| o.flag).collect())
            }
            DetectorSpec::Threshold(cfg) => baseline_sliding_threshold(&stream.records, cfg),
            DetectorSpec::Random { rate, seed } => {
                let s = stream.name.bytes().fold(*seed, |h, b| mix64(h ^ u64::from(b)));
                baseline_random(stream.records.len(), *rate, s)
            }
            DetectorSpec::Perfect => {
                let mut flags = vec![false; stream.records.len()];
                for w in windows {
                    if let Some(i) = stream.records.iter().position(|r| r.timestamp >= w.start) {
                        flags[i] |= w.contains(stream.records[i].timestamp);
                    }
                }
                Ok(flags)
            }
            DetectorSpec::Null => Ok(vec![false; stream.records.len()]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub sigmoid: Sigmoid,
    /// Detections in the first `min(ceil(fraction * len), cap)` records of
    /// each stream are discarded for every detector.
    pub probation_fraction: f64,
    pub probation_cap: usize,
    pub threads: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            sigmoid: Sigmoid::default(),
            probation_fraction: p.probation_fraction,
            probation_cap: p.probation_cap,
            threads: None,
        }
    }
}

impl BenchOptions {
    fn probation(&self, len: usize) -> usize {
        ((self.probation_fraction * len as f64).ceil() as usize).min(self.probation_cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub detector: String,
    pub profile: String,
    pub normalized: f64,
    pub raw: f64,
    pub perfect_raw: f64,
    pub null_raw: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub per_stream: Vec<(String, StreamScore)>,
}

/// Detection timestamps after probation.
pub fn detections(
    stream: &CorpusStream,
    flags: &[bool],
    opts: &BenchOptions,
) -> Vec<NaiveDateTime> {
    let skip = opts.probation(stream.records.len());
    stream
        .records
        .iter()
        .zip(flags)
        .skip(skip)
        .filter(|(_, &f)| f)
        .map(|(r, _)| r.timestamp)
        .collect()
}

/// Runs all detectors over all streams (in parallel across streams) and
/// scores each detector under each profile.
pub fn run_corpus(
    streams: &[CorpusStream],
    labels: &Labels,
    detectors: &[DetectorSpec],
    profiles: &[ApplicationProfile],
    opts: &BenchOptions,
) -> Result<Vec<ScoreReport>> {
    for s in streams {
        if !labels.contains_stream(&s.name) {
            return Err(Error::BadLabels(format!("no labels for stream `{}`", s.name)));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..detectors.len())
        .flat_map(|d| (0..streams.len()).map(move |s| (d, s)))
        .collect();
    let results: Mutex<Vec<Option<Result<Vec<NaiveDateTime>>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = opts
        .threads
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, jobs.len().max(1));

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(d, s)) = jobs.get(j) else { break };
                let stream = &streams[s];
                let out = detectors[d]
                    .flags(stream, labels.windows(&stream.name))
                    .map(|f| detections(stream, &f, opts));
                log::info!("{} on {} done", detectors[d].name(), stream.name);
                results.lock().expect("poisoned")[j] = Some(out);
            });
        }
    });
    let mut results = results.into_inner().expect("poisoned");

    let mut reports = Vec::new();
    for (d, det) in detectors.iter().enumerate() {
        let dets: Vec<Vec<NaiveDateTime>> = (0..streams.len())
            .map(|s| results[d * streams.len() + s].take().expect("job ran"))
            .collect::<Result<_>>()?;
        for profile in profiles {
            let mut rep = ScoreReport {
                detector: det.name().to_string(),
                profile: profile.name.clone(),
                normalized: 0.0,
                raw: 0.0,
                perfect_raw: 0.0,
                null_raw: 0.0,
                tp: 0,
                fp: 0,
                fn_: 0,
                per_stream: Vec::new(),
            };
            for (stream, found) in streams.iter().zip(&dets) {
                let windows = labels.windows(&stream.name);
                let sc = score_stream(found, windows, profile, &opts.sigmoid)?;
                rep.raw += sc.raw;
                rep.perfect_raw += perfect_raw(windows, profile, &opts.sigmoid);
                rep.null_raw += null_raw(windows, profile);
                rep.tp += sc.tp;
                rep.fp += sc.fp;
                rep.fn_ += sc.fn_;
                rep.per_stream.push((stream.name.clone(), sc));
            }
            rep.normalized = normalize_corpus(rep.raw, rep.perfect_raw, rep.null_raw)?;
            reports.push(rep);
        }
    }
    Ok(reports)
}

/// Loads every `*.csv` below `dir`, sorted by relative path.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<CorpusStream>> {
    let mut files = Vec::new();
    collect_csv(dir, &mut files)?;
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let rel = path.strip_prefix(dir).unwrap_or(&path);
            let name = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            let records = read_records(File::open(&path)?, RowPolicy::Skip)?;
            Ok(CorpusStream { name, records })
        })
        .collect()
}

fn collect_csv(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_csv(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(path);
        }
    }
    Ok(())
}

/// Aligned plain-text table, one row per (profile, detector).
pub fn format_table(reports: &[ScoreReport]) -> String {
    let mut s = format!(
        "{:<16} {:<18} {:>10} {:>10} {:>5} {:>6} {:>5}\n",
        "profile", "detector", "score", "raw", "tp", "fp", "fn"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<16} {:<18} {:>10.2} {:>10.3} {:>5} {:>6} {:>5}",
            r.profile, r.detector, r.normalized, r.raw, r.tp, r.fp, r.fn_
        );
    }
    s
}

pub fn write_csv<W: Write>(reports: &[ScoreReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["profile", "detector", "score", "raw", "tp", "fp", "fn"])?;
    for r in reports {
        w.write_record([
            r.profile.clone(),
            r.detector.clone(),
            format!("{:.4}", r.normalized),
            format!("{:.6}", r.raw),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
