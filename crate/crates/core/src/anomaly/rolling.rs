//! Fixed-length window with O(1) mean and variance.

use std::collections::VecDeque;

/// Sliding window over the last `capacity` samples.
///
/// The sum is kept with Kahan compensation and the sum of squared
/// deviations is updated in place on every push/evict. Both are rebuilt
/// from the buffer every `capacity` pushes, so drift stays bounded on
/// unbounded streams.
#[derive(Debug, Clone)]
pub struct RollingWindow {
    capacity: usize,
    buf: VecDeque<f64>,
    sum: f64,
    comp: f64,
    m2: f64,
    since_rebuild: usize,
}

impl RollingWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be > 0");
        Self {
            capacity,
            buf: VecDeque::with_capacity(capacity),
            sum: 0.0,
            comp: 0.0,
            m2: 0.0,
            since_rebuild: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.buf.iter().copied()
    }

    fn kahan_add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn push(&mut self, x: f64) {
        let n_old = self.buf.len();
        let mean_old = self.mean();
        if n_old == self.capacity {
            let old = self.buf.pop_front().expect("full window");
            self.buf.push_back(x);
            self.kahan_add(x);
            self.kahan_add(-old);
            let mean_new = self.mean();
            self.m2 += (x - old) * (x - mean_new + old - mean_old);
        } else {
            self.buf.push_back(x);
            self.kahan_add(x);
            let mean_new = self.mean();
            self.m2 += (x - mean_old) * (x - mean_new);
        }
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
        self.since_rebuild += 1;
        if self.since_rebuild >= self.capacity {
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        self.sum = 0.0;
        self.comp = 0.0;
        for i in 0..self.buf.len() {
            let x = self.buf[i];
            self.kahan_add(x);
        }
        let mean = self.mean();
        self.m2 = self.buf.iter().map(|&x| (x - mean) * (x - mean)).sum();
        self.since_rebuild = 0;
    }

    /// Mean of the window; 0 when empty.
    pub fn mean(&self) -> f64 {
        if self.buf.is_empty() {
            0.0
        } else {
            self.sum / self.buf.len() as f64
        }
    }

    /// Unbiased sample variance; 0 with fewer than two samples.
    pub fn variance(&self) -> f64 {
        let n = self.buf.len();
        if n < 2 {
            0.0
        } else {
            self.m2 / (n - 1) as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_window() {
        let mut w = RollingWindow::new(3);
        assert_eq!(w.mean(), 0.0);
        assert_eq!(w.variance(), 0.0);
        for x in [1.0, 2.0, 3.0, 4.0] {
            w.push(x);
        }
        assert_eq!(w.len(), 3);
        assert!((w.mean() - 3.0).abs() < 1e-15);
        assert!((w.variance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_input_has_zero_variance() {
        let mut w = RollingWindow::new(50);
        for _ in 0..1000 {
            w.push(0.2);
        }
        assert!(w.variance() < 1e-20);
        assert!((w.mean() - 0.2).abs() < 1e-15);
    }
}
