//! Log-binned histograms for complementary CDFs of computation.

use serde::{Deserialize, Serialize};

/// Grid points per decade.
pub const BINS_PER_DECADE: u32 = 20;

/// `L_k = 10^{k / 20}`, so `L_0 = 1`.
pub fn grid_point(k: usize) -> f64 {
    10f64.powf(k as f64 / BINS_PER_DECADE as f64)
}

/// Integer counts of `value = count / scale` against the grid `L_k`.
///
/// Slot 0 holds values `<= L_0`; slot `k + 1` holds values in `(L_k, L_{k+1}]`.
/// `P(value > L_k)` is then the tail sum from slot `k + 1`, exact on the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcdfHistogram {
    pub scale: u64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CcdfHistogram {
    pub fn new(scale: u64) -> Self {
        assert!(scale > 0, "histogram scale must be positive");
        CcdfHistogram {
            scale,
            counts: vec![0],
            total: 0,
        }
    }

    fn slot(&self, count: u64) -> usize {
        let value = count as f64 / self.scale as f64;
        if value <= 1.0 {
            return 0;
        }
        let mut k = (value.log10() * BINS_PER_DECADE as f64).floor().max(0.0) as usize;
        while value <= grid_point(k) && k > 0 {
            k -= 1;
        }
        while value > grid_point(k + 1) {
            k += 1;
        }
        k + 1
    }

    pub fn add(&mut self, count: u64) {
        let s = self.slot(count);
        if s >= self.counts.len() {
            self.counts.resize(s + 1, 0);
        }
        self.counts[s] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &CcdfHistogram) {
        assert_eq!(
            self.scale, other.scale,
            "merging histograms with different scales"
        );
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    /// `(L_k, P(value > L_k))` from `L_0 = 1` up to the first grid point with
    /// an empty tail. Empty histograms give no rows.
    pub fn ccdf(&self) -> Vec<(f64, f64)> {
        if self.total == 0 {
            return Vec::new();
        }
        let mut tail: u64 = self.counts.iter().skip(1).sum();
        let mut rows = Vec::with_capacity(self.counts.len());
        for k in 0..self.counts.len() {
            rows.push((grid_point(k), tail as f64 / self.total as f64));
            if let Some(&c) = self.counts.get(k + 1) {
                tail -= c;
            }
        }
        rows
    }

    /// `P(value > l)` for an arbitrary `l >= 1`, exact at grid points.
    pub fn ccdf_at(&self, l: f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let rows = self.ccdf();
        let mut p = 0.0;
        for &(lk, pk) in rows.iter().rev() {
            if lk <= l * (1.0 + 1e-12) {
                p = pk;
                break;
            }
        }
        p
    }
}
