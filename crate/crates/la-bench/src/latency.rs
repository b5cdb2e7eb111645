//! Wall-clock percentiles of the perception-action cycle.

use crate::error::BenchError;

/// p50/p99 of recorded per-decision latencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyReport {
    pub samples: usize,
    pub p50_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

/// Nearest-rank percentile over decision timings (milliseconds).
pub fn latency_probe(timings_ms: &[f64]) -> Result<LatencyReport, BenchError> {
    if timings_ms.is_empty() {
        return Err(BenchError::NoSamples);
    }
    let mut sorted: Vec<f64> = timings_ms.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    Ok(LatencyReport {
        samples: sorted.len(),
        p50_ms: percentile(&sorted, 50.0),
        p99_ms: percentile(&sorted, 99.0),
        max_ms: *sorted.last().unwrap(),
    })
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}
