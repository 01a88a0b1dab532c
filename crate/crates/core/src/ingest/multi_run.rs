//! Multi-model runs: one detector thread per stream, one combiner.
//!
//! Workers publish `(timestamp, tail probability)` for every record in
//! order over bounded channels. The combiner walks the merged timeline
//! and, at each step, takes exactly one published value from every
//! stream that has a record there; streams without one are padded with
//! the neutral tail.

use std::collections::BTreeSet;
use std::sync::mpsc::{sync_channel, Receiver};
use std::thread;

use chrono::NaiveDateTime;

use super::config::PipelineConfig;
use super::detector::Detector;
use super::record::{format_timestamp, Record};
use crate::error::{invalid, Error, Result};
use crate::multi::{MultiCombiner, MultiConfig};

const CHANNEL_BOUND: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedRow {
    pub timestamp: NaiveDateTime,
    /// Tail probability pushed for each model at this step.
    pub q: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub likelihood: f64,
    pub flag: bool,
}

impl CombinedRow {
    pub fn header(models: usize) -> Vec<String> {
        let mut h = vec!["timestamp".to_string()];
        h.extend((0..models).map(|i| format!("q_{i}")));
        h.extend((0..models).map(|i| format!("smoothed_{i}")));
        h.push("likelihood".into());
        h.push("flag".into());
        h
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut f = vec![format_timestamp(&self.timestamp)];
        f.extend(self.q.iter().map(f64::to_string));
        f.extend(self.smoothed.iter().map(f64::to_string));
        f.push(self.likelihood.to_string());
        f.push(u8::from(self.flag).to_string());
        f
    }
}

struct Published {
    timestamp: NaiveDateTime,
    q: f64,
    in_probation: bool,
}

/// Runs `sources[i]` through a detector configured by `cfgs[i]` and
/// combines the models step by step.
pub fn run_multi(
    sources: &[Vec<Record>],
    cfgs: &[PipelineConfig],
    multi_cfg: &MultiConfig,
) -> Result<Vec<CombinedRow>> {
    if sources.is_empty() {
        return Err(Error::NoModels);
    }
    if cfgs.len() != sources.len() {
        return Err(invalid("cfgs", "one pipeline config per stream"));
    }
    let mut combiner = MultiCombiner::new(sources.len(), *multi_cfg)?;
    check_overlap(sources)?;

    let timeline: BTreeSet<NaiveDateTime> = sources
        .iter()
        .flat_map(|s| s.iter().map(|r| r.timestamp))
        .collect();

    thread::scope(|scope| {
        let mut receivers: Vec<Receiver<Result<Published>>> = Vec::new();
        for (records, cfg) in sources.iter().zip(cfgs) {
            let (tx, rx) = sync_channel(CHANNEL_BOUND);
            receivers.push(rx);
            scope.spawn(move || {
                let mut detector = match Detector::new(cfg.clone(), Some(records.len())) {
                    Ok(d) => d,
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        return;
                    }
                };
                for r in records {
                    let msg = detector.process(r).map(|o| Published {
                        timestamp: o.timestamp,
                        q: o.tail_probability,
                        in_probation: o.in_probation,
                    });
                    let failed = msg.is_err();
                    if tx.send(msg).is_err() || failed {
                        return;
                    }
                }
            });
        }

        let models = sources.len();
        let mut cursor = vec![0usize; models];
        let mut calibrating = vec![true; models];
        let mut rows = Vec::with_capacity(timeline.len());
        for ts in timeline {
            let mut qs = vec![None; models];
            for i in 0..models {
                // Duplicate timestamps within a stream collapse to the last.
                while cursor[i] < sources[i].len() && sources[i][cursor[i]].timestamp == ts {
                    let msg = receivers[i]
                        .recv()
                        .map_err(|_| invalid("worker", "model worker stopped early"))??;
                    debug_assert_eq!(msg.timestamp, ts);
                    calibrating[i] = msg.in_probation;
                    qs[i] = Some(msg.q);
                    cursor[i] += 1;
                }
            }
            let (combined, fired) = combiner.step(&qs)?;
            rows.push(CombinedRow {
                timestamp: ts,
                q: qs.iter().map(|q| q.unwrap_or(crate::multi::NEUTRAL_Q)).collect(),
                smoothed: combined.smoothed,
                likelihood: combined.likelihood,
                flag: fired && !calibrating.iter().any(|&c| c),
            });
        }
        Ok(rows)
    })
}

fn check_overlap(sources: &[Vec<Record>]) -> Result<()> {
    let mut start = None::<NaiveDateTime>;
    let mut end = None::<NaiveDateTime>;
    for s in sources {
        let (first, last) = match (s.first(), s.last()) {
            (Some(f), Some(l)) => (f.timestamp, l.timestamp),
            _ => return Err(Error::NoOverlap),
        };
        start = Some(start.map_or(first, |x| x.max(first)));
        end = Some(end.map_or(last, |x| x.min(last)));
    }
    match (start, end) {
        (Some(a), Some(b)) if a <= b => Ok(()),
        _ => Err(Error::NoOverlap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::detect_all;
    use crate::multi::NEUTRAL_Q;
    use chrono::Duration;

    fn small_cfg() -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.tm.column_count = 512;
        cfg.tm.cells_per_column = 8;
        cfg.encoder.width = 512;
        cfg.encoder.active_bits = 21;
        cfg
    }

    fn stream(start: i64, values: &[f64]) -> Vec<Record> {
        let t0 = NaiveDateTime::parse_from_str("2016-01-01 00:00:00", "%Y-%m-%d %H:%M:%S").unwrap();
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Record::new(t0 + Duration::minutes(5 * (start + i as i64)), v).unwrap())
            .collect()
    }

    fn wave(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i % 12) * 5) as f64).collect()
    }

    #[test]
    fn single_model_reduces_to_single_detector() {
        let recs = stream(0, &wave(300));
        let cfg = small_cfg();
        let rows = run_multi(std::slice::from_ref(&recs), std::slice::from_ref(&cfg), &MultiConfig::unsmoothed()).unwrap();
        let single = detect_all(&recs, &cfg).unwrap();
        assert_eq!(rows.len(), single.len());
        for (r, s) in rows.iter().zip(&single) {
            assert_eq!(r.q[0], s.tail_probability);
            assert!((r.likelihood - s.likelihood).abs() < 1e-12);
            assert_eq!(r.flag, s.flag);
        }
    }

    #[test]
    fn missing_timestamp_is_padded() {
        let a = stream(0, &wave(50));
        let mut b = stream(0, &wave(50));
        b.remove(20);
        let rows = run_multi(&[a, b], &[small_cfg(), small_cfg()], &MultiConfig::default()).unwrap();
        assert_eq!(rows.len(), 50);
        assert_eq!(rows[20].q[1], NEUTRAL_Q);
        assert_eq!(CombinedRow::header(2).len(), rows[0].csv_fields().len());
    }

    #[test]
    fn disjoint_ranges_are_rejected() {
        let a = stream(0, &wave(10));
        let b = stream(100, &wave(10));
        let err = run_multi(&[a, b], &[small_cfg(), small_cfg()], &MultiConfig::default());
        assert!(matches!(err, Err(Error::NoOverlap)));
        assert!(matches!(
            run_multi(&[], &[], &MultiConfig::default()),
            Err(Error::NoModels)
        ));
    }
}
