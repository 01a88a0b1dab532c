//! Online sequence memory.
//!
//! Columns group cells; cells own distal segments whose synapses point at
//! cells that were winners on the previous step. A cell is predictive when
//! one of its segments has at least `activation_threshold` connected
//! synapses onto the currently active cells. The column-level view of the
//! predictive cells is the prediction for the next input.
//!
//! Learning never stops: every step reinforces correct predictions,
//! punishes wrong ones and grows new segments on bursting columns.

mod connections;
mod projection;

pub use projection::{ColumnProjection, ProjectionConfig};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sdr::Sdr;
use connections::{Activity, Connections};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TmConfig {
    pub column_count: u32,
    pub cells_per_column: u32,
    /// Connected matches that make a segment active.
    pub activation_threshold: u32,
    /// Potential matches that make a segment eligible for learning.
    pub min_threshold: u32,
    pub initial_permanence: f32,
    pub connected_permanence: f32,
    pub permanence_increment: f32,
    pub permanence_decrement: f32,
    pub predicted_decrement: f32,
    pub max_segments_per_cell: u32,
    pub max_synapses_per_segment: u32,
    pub new_synapse_count: u32,
    pub seed: u64,
}

impl Default for TmConfig {
    fn default() -> Self {
        Self {
            column_count: 2048,
            cells_per_column: 32,
            activation_threshold: 13,
            min_threshold: 10,
            initial_permanence: 0.21,
            connected_permanence: 0.50,
            permanence_increment: 0.10,
            permanence_decrement: 0.10,
            predicted_decrement: 0.004,
            max_segments_per_cell: 128,
            max_synapses_per_segment: 128,
            new_synapse_count: 20,
            seed: 42,
        }
    }
}

impl TmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.column_count == 0 {
            return Err(invalid("column_count", "must be > 0"));
        }
        if self.cells_per_column == 0 {
            return Err(invalid("cells_per_column", "must be >= 1"));
        }
        if self.min_threshold > self.activation_threshold {
            return Err(invalid(
                "min_threshold",
                "must not exceed activation_threshold",
            ));
        }
        let perms = [
            ("initial_permanence", self.initial_permanence),
            ("connected_permanence", self.connected_permanence),
            ("permanence_increment", self.permanence_increment),
            ("permanence_decrement", self.permanence_decrement),
            ("predicted_decrement", self.predicted_decrement),
        ];
        for (name, p) in perms {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, "must be in [0, 1]"));
            }
        }
        if self.max_segments_per_cell == 0 || self.max_synapses_per_segment == 0 {
            return Err(invalid("max_segments_per_cell", "segment limits must be > 0"));
        }
        if (self.column_count as u64) * (self.cells_per_column as u64) > u32::MAX as u64 {
            return Err(invalid("cells_per_column", "too many cells"));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.column_count as usize * self.cells_per_column as usize
    }
}

/// One step's codes: the active columns and the columns predicted for the
/// next step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmOutput {
    pub active: Sdr,
    pub predicted_next: Sdr,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemporalMemory {
    cfg: TmConfig,
    conn: Connections,
    active_cells: Vec<u32>,
    winner_cells: Vec<u32>,
    /// Segments active / matching against `active_cells`, ordered by cell.
    active_segments: Vec<u32>,
    matching_segments: Vec<u32>,
    /// Potential match counts for the segments in `matching_segments`.
    /// (segment, active potential synapses, active connected synapses)
    matching_potential: Vec<(u32, u32, u32)>,
    predictive_cells: Vec<u32>,
    predicted_columns: Vec<u32>,
    iteration: u64,
    rng: ChaCha8Rng,
    #[serde(skip)]
    scratch: Scratch,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    activity: Activity,
    prev_active_mask: Vec<bool>,
    prev_winner_mask: Vec<bool>,
    column_mask: Vec<bool>,
}

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    tm: TemporalMemory,
}

impl TemporalMemory {
    pub fn new(cfg: TmConfig) -> Result<Self> {
        cfg.validate()?;
        let num_cells = cfg.num_cells();
        Ok(Self {
            conn: Connections::new(num_cells),
            active_cells: Vec::new(),
            winner_cells: Vec::new(),
            active_segments: Vec::new(),
            matching_segments: Vec::new(),
            matching_potential: Vec::new(),
            predictive_cells: Vec::new(),
            predicted_columns: Vec::new(),
            iteration: 0,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            scratch: Scratch::default(),
            cfg,
        })
    }

    pub fn config(&self) -> &TmConfig {
        &self.cfg
    }

    pub fn active_cells(&self) -> &[u32] {
        &self.active_cells
    }

    pub fn winner_cells(&self) -> &[u32] {
        &self.winner_cells
    }

    pub fn predictive_cells(&self) -> &[u32] {
        &self.predictive_cells
    }

    /// Columns predicted for the next step.
    pub fn predicted_columns(&self) -> Sdr {
        Sdr::from_sorted_unchecked(self.cfg.column_count, self.predicted_columns.clone())
    }

    pub fn num_segments(&self) -> usize {
        self.conn.num_segments()
    }

    pub fn num_synapses(&self) -> usize {
        self.conn.num_synapses()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Every live synapse permanence.
    pub fn permanences(&self) -> impl Iterator<Item = f32> + '_ {
        self.conn.permanences()
    }

    /// Forgets the current sequence context. Learned segments stay.
    pub fn reset(&mut self) {
        self.active_cells.clear();
        self.winner_cells.clear();
        self.active_segments.clear();
        self.matching_segments.clear();
        self.matching_potential.clear();
        self.predictive_cells.clear();
        self.predicted_columns.clear();
    }

    #[inline]
    fn column_of(&self, cell: u32) -> u32 {
        cell / self.cfg.cells_per_column
    }

    /// Advances one step on `active_columns`.
    pub fn step(&mut self, active_columns: &Sdr, learn: bool) -> Result<TmOutput> {
        if active_columns.width() != self.cfg.column_count {
            return Err(Error::WidthMismatch {
                left: active_columns.width(),
                right: self.cfg.column_count,
            });
        }
        self.iteration += 1;
        let num_cells = self.cfg.num_cells();
        let prev_active = std::mem::take(&mut self.active_cells);
        let prev_winners = std::mem::take(&mut self.winner_cells);
        let active_segments = std::mem::take(&mut self.active_segments);
        let matching_segments = std::mem::take(&mut self.matching_segments);
        let matching_potential = std::mem::take(&mut self.matching_potential);

        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.prev_active_mask.resize(num_cells, false);
        for &c in &prev_active {
            scratch.prev_active_mask[c as usize] = true;
        }
        scratch.prev_winner_mask.resize(num_cells, false);
        for &c in &prev_winners {
            scratch.prev_winner_mask[c as usize] = true;
        }
        scratch
            .column_mask
            .resize(self.cfg.column_count as usize, false);
        for &c in active_columns.active() {
            scratch.column_mask[c as usize] = true;
        }

        let potential_of = |seg: u32| -> (u32, u32) {
            matching_potential
                .binary_search_by_key(&seg, |&(s, _, _)| s)
                .map(|i| (matching_potential[i].1, matching_potential[i].2))
                .unwrap_or((0, 0))
        };

        let (mut ai, mut mi) = (0usize, 0usize);
        for &col in active_columns.active() {
            // Advance the cell-ordered segment lists to this column.
            while ai < active_segments.len()
                && self.column_of(self.conn.segment(active_segments[ai]).cell) < col
            {
                ai += 1;
            }
            let a_start = ai;
            while ai < active_segments.len()
                && self.column_of(self.conn.segment(active_segments[ai]).cell) == col
            {
                ai += 1;
            }
            while mi < matching_segments.len()
                && self.column_of(self.conn.segment(matching_segments[mi]).cell) < col
            {
                mi += 1;
            }
            let m_start = mi;
            while mi < matching_segments.len()
                && self.column_of(self.conn.segment(matching_segments[mi]).cell) == col
            {
                mi += 1;
            }

            if ai > a_start {
                self.activate_predicted_column(
                    &active_segments[a_start..ai],
                    &prev_winners,
                    &scratch.prev_active_mask,
                    &scratch.prev_winner_mask,
                    learn,
                );
            } else {
                self.burst_column(
                    col,
                    &matching_segments[m_start..mi],
                    &prev_winners,
                    &scratch.prev_active_mask,
                    &potential_of,
                    learn,
                );
            }
        }

        if learn && self.cfg.predicted_decrement > 0.0 {
            for &seg in &matching_segments {
                if !self.conn.segment(seg).alive {
                    continue;
                }
                let col = self.column_of(self.conn.segment(seg).cell);
                if !scratch.column_mask[col as usize] {
                    self.adapt_segment(
                        seg,
                        &scratch.prev_active_mask,
                        -self.cfg.predicted_decrement,
                        0.0,
                    );
                }
            }
        }

        for &c in &prev_active {
            scratch.prev_active_mask[c as usize] = false;
        }
        for &c in &prev_winners {
            scratch.prev_winner_mask[c as usize] = false;
        }
        for &c in active_columns.active() {
            scratch.column_mask[c as usize] = false;
        }
        self.compute_predictions(&mut scratch.activity);
        self.scratch = scratch;

        Ok(TmOutput {
            active: active_columns.clone(),
            predicted_next: self.predicted_columns(),
        })
    }

    fn activate_predicted_column(
        &mut self,
        segments: &[u32],
        prev_winners: &[u32],
        prev_active_mask: &[bool],
        prev_winner_mask: &[bool],
        learn: bool,
    ) {
        for &seg in segments {
            let cell = self.conn.segment(seg).cell;
            if self.active_cells.last() != Some(&cell) {
                self.active_cells.push(cell);
                self.winner_cells.push(cell);
            }
            if learn && self.conn.segment(seg).alive {
                self.adapt_segment(
                    seg,
                    prev_active_mask,
                    self.cfg.permanence_increment,
                    self.cfg.permanence_decrement,
                );
                let want = self.growth_budget(seg, prev_winner_mask);
                if want > 0 && self.conn.segment(seg).alive {
                    self.grow_synapses(seg, prev_winners, want);
                }
            }
        }
    }

    fn burst_column(
        &mut self,
        col: u32,
        matching: &[u32],
        prev_winners: &[u32],
        prev_active_mask: &[bool],
        potential_of: &dyn Fn(u32) -> (u32, u32),
        learn: bool,
    ) {
        let cpc = self.cfg.cells_per_column;
        let first = col * cpc;
        self.active_cells.extend(first..first + cpc);

        let mut best: Option<(u32, u32)> = None;
        for &seg in matching {
            let (p, connected) = potential_of(seg);
            // A segment that already predicts reliably from other cells
            // belongs to another context; matching it here only through
            // weak synapses must not pull it over.
            if connected < self.cfg.min_threshold && self.is_established(seg) {
                continue;
            }
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((seg, p));
            }
        }

        let winner = match best {
            Some((seg, p)) => {
                let cell = self.conn.segment(seg).cell;
                if learn {
                    self.adapt_segment(
                        seg,
                        prev_active_mask,
                        self.cfg.permanence_increment,
                        self.cfg.permanence_decrement,
                    );
                    // Only top up to what activation needs; growing the full
                    // budget here would let a segment matched through a
                    // burst absorb a second context.
                    let want = (self.cfg.activation_threshold as usize).saturating_sub(p as usize);
                    if want > 0 && self.conn.segment(seg).alive {
                        self.grow_synapses(seg, prev_winners, want);
                    }
                }
                cell
            }
            None => {
                let cell = self.least_used_cell(col);
                if learn && !prev_winners.is_empty() {
                    let seg = self.conn.create_segment(
                        cell,
                        self.iteration,
                        self.cfg.max_segments_per_cell as usize,
                    );
                    let n = (self.cfg.new_synapse_count as usize).min(prev_winners.len());
                    self.grow_synapses(seg, prev_winners, n);
                }
                cell
            }
        };
        self.winner_cells.push(winner);
    }

    /// New synapses a learning segment may grow: `new_synapse_count` minus
    /// the synapses it already has onto previous winner cells. Counting
    /// winners rather than all active cells lets a segment follow a
    /// predecessor that burst and then settled on new winner cells.
    fn growth_budget(&self, seg: u32, prev_winner_mask: &[bool]) -> usize {
        (self.cfg.new_synapse_count as usize).saturating_sub(self.synapses_onto(seg, prev_winner_mask))
    }

    fn is_established(&self, seg: u32) -> bool {
        let segment = self.conn.segment(seg);
        let connected = segment
            .synapses
            .iter()
            .filter(|&&s| self.conn.synapse(s).permanence >= self.cfg.connected_permanence)
            .count();
        connected >= self.cfg.activation_threshold as usize
    }

    fn synapses_onto(&self, seg: u32, mask: &[bool]) -> usize {
        self.conn
            .segment(seg)
            .synapses
            .iter()
            .filter(|&&s| mask[self.conn.synapse(s).presyn as usize])
            .count()
    }

    fn least_used_cell(&self, col: u32) -> u32 {
        let first = col * self.cfg.cells_per_column;
        (first..first + self.cfg.cells_per_column)
            .min_by_key(|&c| (self.conn.segments_for_cell(c).len(), c))
            .expect("cells_per_column >= 1")
    }

    /// Adds `inc` to synapses from previously active cells and subtracts
    /// `dec` from the rest. Synapses reaching zero are removed, and so is
    /// a segment left without synapses.
    fn adapt_segment(&mut self, seg: u32, prev_active_mask: &[bool], inc: f32, dec: f32) {
        self.conn.touch(seg, self.iteration);
        let synapses = self.conn.segment(seg).synapses.clone();
        for syn in synapses {
            let s = self.conn.synapse(syn);
            let perm = if prev_active_mask[s.presyn as usize] {
                s.permanence + inc
            } else {
                s.permanence - dec
            };
            if perm < connections::PERM_EPS {
                self.conn.destroy_synapse(syn);
            } else {
                self.conn.set_permanence(syn, perm);
            }
        }
        if self.conn.segment(seg).synapses.is_empty() {
            self.conn.destroy_segment(seg);
        }
    }

    fn grow_synapses(&mut self, seg: u32, prev_winners: &[u32], want: usize) {
        let existing: Vec<u32> = self
            .conn
            .segment(seg)
            .synapses
            .iter()
            .map(|&s| self.conn.synapse(s).presyn)
            .collect();
        let candidates: Vec<u32> = prev_winners
            .iter()
            .copied()
            .filter(|c| !existing.contains(c))
            .collect();
        let max = self.cfg.max_synapses_per_segment as usize;
        let n = want.min(candidates.len()).min(max);
        if n == 0 {
            return;
        }
        let overflow = (existing.len() + n).saturating_sub(max);
        if overflow > 0 {
            let mut weakest: Vec<(f32, u32)> = self
                .conn
                .segment(seg)
                .synapses
                .iter()
                .map(|&s| (self.conn.synapse(s).permanence, s))
                .collect();
            weakest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, s) in weakest.iter().take(overflow) {
                self.conn.destroy_synapse(s);
            }
        }
        let mut picks: Vec<usize> = sample(&mut self.rng, candidates.len(), n).into_vec();
        picks.sort_unstable();
        for i in picks {
            self.conn
                .create_synapse(seg, candidates[i], self.cfg.initial_permanence);
        }
    }

    fn compute_predictions(&mut self, activity: &mut Activity) {
        self.conn.compute_activity(
            &self.active_cells,
            self.cfg.connected_permanence,
            activity,
        );
        self.active_segments.clear();
        self.matching_segments.clear();
        self.matching_potential.clear();
        for &seg in &activity.touched {
            let s = seg as usize;
            if activity.connected[s] >= self.cfg.activation_threshold {
                self.active_segments.push(seg);
            }
            if activity.potential[s] >= self.cfg.min_threshold {
                self.matching_segments.push(seg);
                self.matching_potential
                    .push((seg, activity.potential[s], activity.connected[s]));
            }
        }
        let conn = &self.conn;
        let key = |&s: &u32| (conn.segment(s).cell, s);
        self.active_segments.sort_unstable_by_key(key);
        self.matching_segments.sort_unstable_by_key(key);
        self.matching_potential.sort_unstable_by_key(|&(s, _, _)| s);

        self.predictive_cells.clear();
        self.predicted_columns.clear();
        for &seg in &self.active_segments {
            let cell = self.conn.segment(seg).cell;
            if self.predictive_cells.last() != Some(&cell) {
                self.predictive_cells.push(cell);
                let col = cell / self.cfg.cells_per_column;
                if self.predicted_columns.last() != Some(&col) {
                    self.predicted_columns.push(col);
                }
            }
        }
    }

    /// Versioned JSON dump of the learned state and current context.
    pub fn snapshot_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            version: u32,
            tm: &'a TemporalMemory,
        }
        Ok(serde_json::to_string(&Out {
            version: SNAPSHOT_VERSION,
            tm: self,
        })?)
    }

    pub fn restore_json(json: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(json)?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Parse(format!(
                "snapshot version {} unsupported",
                snap.version
            )));
        }
        snap.tm.cfg.validate()?;
        Ok(snap.tm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> TmConfig {
        TmConfig {
            column_count: 256,
            cells_per_column: 8,
            ..Default::default()
        }
    }

    fn code(offset: u32) -> Sdr {
        Sdr::from_indices(256, (0..20).map(|i| offset + i)).unwrap()
    }

    #[test]
    fn untrained_predicts_nothing() {
        let mut tm = TemporalMemory::new(small_cfg()).unwrap();
        let out = tm.step(&code(0), true).unwrap();
        assert!(out.predicted_next.is_empty());
        assert_eq!(out.active, code(0));
        // every active column bursts
        assert_eq!(tm.active_cells().len(), 20 * 8);
        assert_eq!(tm.winner_cells().len(), 20);
    }

    #[test]
    fn learns_a_transition() {
        let mut tm = TemporalMemory::new(small_cfg()).unwrap();
        for _ in 0..6 {
            tm.reset();
            tm.step(&code(0), true).unwrap();
            tm.step(&code(100), true).unwrap();
        }
        tm.reset();
        let out = tm.step(&code(0), false).unwrap();
        assert_eq!(out.predicted_next, code(100));
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let mut tm = TemporalMemory::new(small_cfg()).unwrap();
        assert!(tm.step(&Sdr::empty(10), true).is_err());
    }

    #[test]
    fn reset_is_idempotent_and_keeps_segments() {
        let mut tm = TemporalMemory::new(small_cfg()).unwrap();
        tm.step(&code(0), true).unwrap();
        tm.step(&code(50), true).unwrap();
        let segs = tm.num_segments();
        assert!(segs > 0);
        tm.reset();
        tm.reset();
        assert!(tm.active_cells().is_empty());
        assert!(tm.winner_cells().is_empty());
        assert!(tm.predicted_columns().is_empty());
        assert_eq!(tm.num_segments(), segs);
        tm.step(&code(0), true).unwrap();
        assert_eq!(tm.active_cells().len(), 160);
    }

    #[test]
    fn config_validation() {
        let mut c = small_cfg();
        c.min_threshold = 20;
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.cells_per_column = 0;
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.permanence_increment = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn segment_cap_is_enforced() {
        let cfg = TmConfig {
            column_count: 64,
            cells_per_column: 1,
            max_segments_per_cell: 2,
            activation_threshold: 2,
            min_threshold: 1,
            new_synapse_count: 4,
            ..Default::default()
        };
        let mut tm = TemporalMemory::new(cfg).unwrap();
        let c = |o: u32| Sdr::from_indices(64, (0..4).map(|i| o + i)).unwrap();
        for a in 0..10u32 {
            tm.reset();
            tm.step(&c(a * 4 % 60), true).unwrap();
            tm.step(&c(60), true).unwrap();
        }
        for cell in 60..64 {
            assert!(tm.conn.segments_for_cell(cell).len() <= 2);
        }
    }

    #[test]
    fn snapshot_round_trip_preserves_behaviour() {
        let mut tm = TemporalMemory::new(small_cfg()).unwrap();
        for i in 0..30 {
            tm.step(&code((i % 5) * 40), true).unwrap();
        }
        let json = tm.snapshot_json().unwrap();
        let mut restored = TemporalMemory::restore_json(&json).unwrap();
        for i in 30..40 {
            let a = tm.step(&code((i % 5) * 40), true).unwrap();
            let b = restored.step(&code((i % 5) * 40), true).unwrap();
            assert_eq!(a, b);
        }
        let bad = json.replacen("\"version\":1", "\"version\":99", 1);
        assert!(TemporalMemory::restore_json(&bad).is_err());
    }
}
