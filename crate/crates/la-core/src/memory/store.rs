//! Episodic experience store with exact nearest-neighbor retrieval.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::types::{LinkAction, STATE_DIM};

/// Default store capacity.
pub const STORE_CAPACITY: usize = 100_000;

/// One stored control experience.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Encoded controller state at decision time.
    pub state_vector: [f64; STATE_DIM],
    /// Action that was executed.
    pub action: LinkAction,
    /// Reward observed for it.
    pub outcome_reward: f64,
    /// Windowed BLER right after the outcome.
    pub windowed_bler_after: f64,
    pub timestamp_tti: u64,
}

/// Capped FIFO store. Retrieval is an exact linear scan over standardized
/// features; at this scale determinism is worth more than an index.
#[derive(Debug, Clone)]
pub struct EpisodeStore {
    capacity: usize,
    records: VecDeque<EpisodeRecord>,
    sums: [f64; STATE_DIM],
    sumsqs: [f64; STATE_DIM],
}

impl EpisodeStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            records: VecDeque::new(),
            sums: [0.0; STATE_DIM],
            sumsqs: [0.0; STATE_DIM],
        }
    }

    pub fn with_default_capacity() -> Self {
        Self::new(STORE_CAPACITY)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Insert a record, evicting the oldest once at capacity.
    pub fn store(&mut self, record: EpisodeRecord) {
        for (i, v) in record.state_vector.iter().enumerate() {
            self.sums[i] += v;
            self.sumsqs[i] += v * v;
        }
        self.records.push_back(record);
        while self.records.len() > self.capacity {
            let old = self.records.pop_front().expect("non-empty");
            for (i, v) in old.state_vector.iter().enumerate() {
                self.sums[i] -= v;
                self.sumsqs[i] -= v * v;
            }
        }
    }

    /// Per-feature standard deviation over current contents; features with
    /// (near) zero spread fall back to unit scale.
    pub fn feature_scales(&self) -> [f64; STATE_DIM] {
        let n = self.records.len() as f64;
        let mut scales = [1.0; STATE_DIM];
        if n < 2.0 {
            return scales;
        }
        for i in 0..STATE_DIM {
            let mean = self.sums[i] / n;
            let var = (self.sumsqs[i] / n - mean * mean).max(0.0);
            let std = libm::sqrt(var);
            if std > 1e-9 {
                scales[i] = std;
            }
        }
        scales
    }

    /// The `k` records closest to `query` in standardized Euclidean
    /// distance, ascending; equal distances break toward newer records.
    pub fn retrieve_similar(&self, query: &[f64; STATE_DIM], k: usize) -> Vec<EpisodeRecord> {
        if k == 0 || self.records.is_empty() {
            return Vec::new();
        }
        let scales = self.feature_scales();
        let mut inv_scales = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            inv_scales[i] = 1.0 / scales[i];
        }
        // Bounded candidate set; only the current worst entry is tracked so
        // the scan stays O(n * dim) with k-sized bookkeeping on replacement.
        let mut best: Vec<(f64, u64, usize)> = Vec::with_capacity(k);
        let mut worst_slot = 0usize;
        // (d2, tti) ordering: closer wins, then newer.
        let beats = |a: (f64, u64), b: (f64, u64)| a.0 < b.0 || (a.0 == b.0 && a.1 > b.1);
        for (idx, rec) in self.records.iter().enumerate() {
            let mut d2 = 0.0;
            for i in 0..STATE_DIM {
                let d = (query[i] - rec.state_vector[i]) * inv_scales[i];
                d2 += d * d;
            }
            if best.len() < k {
                best.push((d2, rec.timestamp_tti, idx));
                if best.len() == k {
                    worst_slot = find_worst(&best);
                }
            } else {
                let w = best[worst_slot];
                if beats((d2, rec.timestamp_tti), (w.0, w.1)) {
                    best[worst_slot] = (d2, rec.timestamp_tti, idx);
                    worst_slot = find_worst(&best);
                }
            }
        }
        best.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distance")
                .then(b.1.cmp(&a.1))
        });
        best.into_iter()
            .map(|(_, _, idx)| self.records[idx].clone())
            .collect()
    }
}

/// Slot of the entry that loses first: largest distance, oldest on ties.
fn find_worst(best: &[(f64, u64, usize)]) -> usize {
    let mut worst = 0usize;
    for (i, e) in best.iter().enumerate().skip(1) {
        let w = &best[worst];
        if e.0 > w.0 || (e.0 == w.0 && e.1 < w.1) {
            worst = i;
        }
    }
    worst
}
