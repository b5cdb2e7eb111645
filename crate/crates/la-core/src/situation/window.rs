//! Rolling feedback window over the last 100 TTIs.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::SituationError;

/// Default history length in TTIs.
pub const WINDOW_CAPACITY: usize = 100;

/// Ring buffers of filtered SINR, ACK bits and delivered bits, oldest
/// evicted first.
#[derive(Debug, Clone)]
pub struct SignalWindow {
    capacity: usize,
    sinr_db: VecDeque<f64>,
    acks: VecDeque<bool>,
    delivered_bits: VecDeque<u64>,
}

impl SignalWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            sinr_db: VecDeque::with_capacity(capacity + 1),
            acks: VecDeque::with_capacity(capacity + 1),
            delivered_bits: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.sinr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sinr_db.is_empty()
    }

    /// True once the window holds `capacity` samples.
    pub fn is_warm(&self) -> bool {
        self.len() >= self.capacity
    }

    pub fn push(&mut self, sinr_db: f64, ack: bool, delivered_bits: u64) {
        self.sinr_db.push_back(sinr_db);
        self.acks.push_back(ack);
        self.delivered_bits.push_back(delivered_bits);
        while self.sinr_db.len() > self.capacity {
            self.sinr_db.pop_front();
            self.acks.pop_front();
            self.delivered_bits.pop_front();
        }
    }

    /// NACK count over window length; zero for an empty window.
    pub fn windowed_bler(&self) -> f64 {
        if self.acks.is_empty() {
            return 0.0;
        }
        let nacks = self.acks.iter().filter(|a| !**a).count();
        nacks as f64 / self.acks.len() as f64
    }

    /// Mean delivered bits per TTI over the window.
    pub fn mean_delivered_bits(&self) -> f64 {
        if self.delivered_bits.is_empty() {
            return 0.0;
        }
        let total: u64 = self.delivered_bits.iter().sum();
        total as f64 / self.delivered_bits.len() as f64
    }

    /// The filtered SINR series, oldest first.
    pub fn sinr_series(&self) -> Vec<f64> {
        self.sinr_db.iter().copied().collect()
    }

    /// Last `n` filtered SINR values, oldest first.
    pub fn sinr_tail(&self, n: usize) -> Vec<f64> {
        let len = self.sinr_db.len();
        let skip = len.saturating_sub(n);
        self.sinr_db.iter().skip(skip).copied().collect()
    }

    pub fn latest_sinr(&self) -> Option<f64> {
        self.sinr_db.back().copied()
    }
}

/// Arithmetic mean of the window contents.
pub fn sliding_mean(values: &[f64]) -> Result<f64, SituationError> {
    if values.is_empty() {
        return Err(SituationError::EmptyWindow);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
