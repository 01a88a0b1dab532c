//! Fixed random projection from encoder space onto columns.
//!
//! Each column owns a seeded random potential pool of input bits. A
//! column's overlap is the number of active input bits in its pool, and
//! the `k` columns with the highest overlap win (ties to the lower index).
//! Nothing here learns; it stands in for a spatial pooler.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sdr::Sdr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    /// Fraction of the input each column samples.
    pub potential_fraction: f64,
    /// Fraction of columns active per step.
    pub active_fraction: f64,
    pub seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            potential_fraction: 0.5,
            active_fraction: 0.02,
            seed: 1956,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ColumnProjection {
    input_width: u32,
    column_count: u32,
    k: usize,
    /// input bit -> columns whose pool contains it
    bit_columns: Vec<Vec<u32>>,
}

impl ColumnProjection {
    pub fn new(input_width: u32, column_count: u32, cfg: &ProjectionConfig) -> Result<Self> {
        if input_width == 0 || column_count == 0 {
            return Err(invalid("column_count", "input and column counts must be > 0"));
        }
        if !(cfg.potential_fraction > 0.0 && cfg.potential_fraction <= 1.0) {
            return Err(invalid("potential_fraction", "must be in (0, 1]"));
        }
        if !(cfg.active_fraction > 0.0 && cfg.active_fraction <= 1.0) {
            return Err(invalid("active_fraction", "must be in (0, 1]"));
        }
        let pool = ((cfg.potential_fraction * input_width as f64).round() as usize)
            .clamp(1, input_width as usize);
        let k = ((cfg.active_fraction * column_count as f64).round() as usize)
            .clamp(1, column_count as usize);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut bit_columns = vec![Vec::new(); input_width as usize];
        for col in 0..column_count {
            for bit in sample(&mut rng, input_width as usize, pool) {
                bit_columns[bit].push(col);
            }
        }
        Ok(Self {
            input_width,
            column_count,
            k,
            bit_columns,
        })
    }

    pub fn input_width(&self) -> u32 {
        self.input_width
    }

    pub fn column_count(&self) -> u32 {
        self.column_count
    }

    /// Active columns per non-empty input.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Per-column overlap with `enc`.
    pub fn overlaps(&self, enc: &Sdr) -> Result<Vec<u32>> {
        if enc.width() != self.input_width {
            return Err(Error::WidthMismatch {
                left: enc.width(),
                right: self.input_width,
            });
        }
        let mut overlaps = vec![0u32; self.column_count as usize];
        for &bit in enc.active() {
            for &col in &self.bit_columns[bit as usize] {
                overlaps[col as usize] += 1;
            }
        }
        Ok(overlaps)
    }

    /// Top-`k` columns by overlap. An empty input activates nothing.
    pub fn project(&self, enc: &Sdr) -> Result<Sdr> {
        let overlaps = self.overlaps(enc)?;
        if enc.is_empty() {
            return Ok(Sdr::empty(self.column_count));
        }
        let mut order: Vec<u32> = (0..self.column_count).collect();
        let rank = |&c: &u32| (std::cmp::Reverse(overlaps[c as usize]), c);
        if self.k < order.len() {
            order.select_nth_unstable_by_key(self.k - 1, rank);
            order.truncate(self.k);
        }
        order.sort_unstable();
        Ok(Sdr::from_sorted_unchecked(self.column_count, order))
    }
}
