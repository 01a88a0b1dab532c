//! Distal segment and synapse storage.
//!
//! Segments and synapses live in slabs with free lists; every synapse is
//! also indexed by its presynaptic cell so that segment activity can be
//! computed from the active cells alone.

use serde::{Deserialize, Serialize};

pub(crate) const PERM_EPS: f32 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Synapse {
    pub presyn: u32,
    pub segment: u32,
    pub permanence: f32,
    pub alive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Segment {
    pub cell: u32,
    pub synapses: Vec<u32>,
    pub last_used: u64,
    pub alive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Connections {
    segments: Vec<Segment>,
    free_segments: Vec<u32>,
    synapses: Vec<Synapse>,
    free_synapses: Vec<u32>,
    cell_segments: Vec<Vec<u32>>,
    presyn_synapses: Vec<Vec<u32>>,
}

/// Per-segment counts of synapses onto the active cells.
#[derive(Debug, Default, Clone)]
pub(crate) struct Activity {
    pub connected: Vec<u32>,
    pub potential: Vec<u32>,
    pub touched: Vec<u32>,
}

impl Connections {
    pub fn new(num_cells: usize) -> Self {
        Self {
            segments: Vec::new(),
            free_segments: Vec::new(),
            synapses: Vec::new(),
            free_synapses: Vec::new(),
            cell_segments: vec![Vec::new(); num_cells],
            presyn_synapses: vec![Vec::new(); num_cells],
        }
    }

    pub fn segment(&self, seg: u32) -> &Segment {
        &self.segments[seg as usize]
    }

    pub fn synapse(&self, syn: u32) -> &Synapse {
        &self.synapses[syn as usize]
    }

    pub fn segments_for_cell(&self, cell: u32) -> &[u32] {
        &self.cell_segments[cell as usize]
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len() - self.free_segments.len()
    }

    pub fn num_synapses(&self) -> usize {
        self.synapses.len() - self.free_synapses.len()
    }

    /// Creates a segment on `cell`, evicting the least recently used one
    /// when the cell is already at `max_per_cell`.
    pub fn create_segment(&mut self, cell: u32, iteration: u64, max_per_cell: usize) -> u32 {
        while self.cell_segments[cell as usize].len() >= max_per_cell.max(1) {
            let lru = *self.cell_segments[cell as usize]
                .iter()
                .min_by_key(|&&s| (self.segments[s as usize].last_used, s))
                .expect("non-empty");
            self.destroy_segment(lru);
        }
        let segment = Segment {
            cell,
            synapses: Vec::new(),
            last_used: iteration,
            alive: true,
        };
        let id = match self.free_segments.pop() {
            Some(id) => {
                self.segments[id as usize] = segment;
                id
            }
            None => {
                self.segments.push(segment);
                (self.segments.len() - 1) as u32
            }
        };
        self.cell_segments[cell as usize].push(id);
        id
    }

    pub fn destroy_segment(&mut self, seg: u32) {
        let synapses = std::mem::take(&mut self.segments[seg as usize].synapses);
        for syn in synapses {
            self.unlink_presyn(syn);
            self.synapses[syn as usize].alive = false;
            self.free_synapses.push(syn);
        }
        let s = &mut self.segments[seg as usize];
        s.alive = false;
        let cell = s.cell as usize;
        self.cell_segments[cell].retain(|&x| x != seg);
        self.free_segments.push(seg);
    }

    pub fn create_synapse(&mut self, seg: u32, presyn: u32, permanence: f32) -> u32 {
        let synapse = Synapse {
            presyn,
            segment: seg,
            permanence,
            alive: true,
        };
        let id = match self.free_synapses.pop() {
            Some(id) => {
                self.synapses[id as usize] = synapse;
                id
            }
            None => {
                self.synapses.push(synapse);
                (self.synapses.len() - 1) as u32
            }
        };
        self.segments[seg as usize].synapses.push(id);
        self.presyn_synapses[presyn as usize].push(id);
        id
    }

    pub fn destroy_synapse(&mut self, syn: u32) {
        let seg = self.synapses[syn as usize].segment as usize;
        self.segments[seg].synapses.retain(|&x| x != syn);
        self.unlink_presyn(syn);
        self.synapses[syn as usize].alive = false;
        self.free_synapses.push(syn);
    }

    fn unlink_presyn(&mut self, syn: u32) {
        let presyn = self.synapses[syn as usize].presyn as usize;
        let list = &mut self.presyn_synapses[presyn];
        if let Some(pos) = list.iter().position(|&x| x == syn) {
            list.swap_remove(pos);
        }
    }

    pub fn set_permanence(&mut self, syn: u32, permanence: f32) {
        self.synapses[syn as usize].permanence = permanence.clamp(0.0, 1.0);
    }

    pub fn touch(&mut self, seg: u32, iteration: u64) {
        self.segments[seg as usize].last_used = iteration;
    }

    /// Counts, for every segment with at least one synapse onto
    /// `active_cells`, the connected and potential synapse matches.
    pub fn compute_activity(&self, active_cells: &[u32], connected: f32, out: &mut Activity) {
        out.connected.clear();
        out.connected.resize(self.segments.len(), 0);
        out.potential.clear();
        out.potential.resize(self.segments.len(), 0);
        out.touched.clear();
        let threshold = connected - PERM_EPS;
        for &cell in active_cells {
            for &syn in &self.presyn_synapses[cell as usize] {
                let s = &self.synapses[syn as usize];
                let seg = s.segment as usize;
                if out.potential[seg] == 0 {
                    out.touched.push(s.segment);
                }
                out.potential[seg] += 1;
                if s.permanence >= threshold {
                    out.connected[seg] += 1;
                }
            }
        }
    }

    /// Permanences of every live synapse, for invariant checks.
    pub fn permanences(&self) -> impl Iterator<Item = f32> + '_ {
        self.synapses
            .iter()
            .filter(|s| s.alive)
            .map(|s| s.permanence)
    }
}
