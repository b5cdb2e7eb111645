//! Side-by-side comparison of two KPI series.

use serde::Serialize;

use crate::error::BenchError;
use crate::kpi::KpiSample;

/// Comparison of run A against baseline B.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub samples: usize,
    pub a_mean_tpt_mbps: f64,
    pub b_mean_tpt_mbps: f64,
    /// 100 x (A - B) / B
    pub tpt_gain_pct: f64,
    pub a_mean_bler: f64,
    pub b_mean_bler: f64,
    /// 100 x (B - A) / B
    pub bler_reduction_pct: f64,
    pub a_mean_mcs: f64,
    pub b_mean_mcs: f64,
}

/// Compare two equal-length KPI series.
pub fn compare(a: &[KpiSample], b: &[KpiSample]) -> Result<CompareReport, BenchError> {
    if a.len() != b.len() {
        return Err(BenchError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.is_empty() {
        return Err(BenchError::LengthMismatch { a: 0, b: 0 });
    }
    let mean = |xs: &[KpiSample], f: fn(&KpiSample) -> f64| -> f64 {
        xs.iter().map(f).sum::<f64>() / xs.len() as f64
    };
    let a_tpt = mean(a, |s| s.dl_tpt_mbps);
    let b_tpt = mean(b, |s| s.dl_tpt_mbps);
    let a_bler = mean(a, |s| s.bler);
    let b_bler = mean(b, |s| s.bler);
    Ok(CompareReport {
        samples: a.len(),
        a_mean_tpt_mbps: a_tpt,
        b_mean_tpt_mbps: b_tpt,
        tpt_gain_pct: pct_gain(a_tpt, b_tpt),
        a_mean_bler: a_bler,
        b_mean_bler: b_bler,
        bler_reduction_pct: pct_reduction(a_bler, b_bler),
        a_mean_mcs: mean(a, |s| s.mcs_mean),
        b_mean_mcs: mean(b, |s| s.mcs_mean),
    })
}

fn pct_gain(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        100.0 * (a - b) / b
    }
}

fn pct_reduction(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        100.0 * (b - a) / b
    }
}

impl CompareReport {
    pub fn render_text(&self) -> String {
        format!(
            "samples            {}\n\
             mean tpt   A vs B  {:.3} vs {:.3} Mbps ({:+.2}%)\n\
             mean bler  A vs B  {:.6} vs {:.6} ({:+.2}% reduction)\n\
             mean mcs   A vs B  {:.2} vs {:.2}\n",
            self.samples,
            self.a_mean_tpt_mbps,
            self.b_mean_tpt_mbps,
            self.tpt_gain_pct,
            self.a_mean_bler,
            self.b_mean_bler,
            self.bler_reduction_pct,
            self.a_mean_mcs,
            self.b_mean_mcs,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use la_core::types::Mode;

    fn series(tpt: f64, bler: f64, n: usize) -> Vec<KpiSample> {
        (0..n)
            .map(|i| KpiSample {
                sample_idx: i as u64,
                t_ms: 100 * (i as u64 + 1),
                dl_tpt_mbps: tpt,
                bler,
                mcs_mean: 20.0,
                rank_mean: 2.0,
                mode: Mode::Embb,
            })
            .collect()
    }

    #[test]
    fn throughput_gain_matches_reference_numbers() {
        // 504 vs 476 Mbps is a 5.88% gain.
        let r = compare(&series(504.0, 0.0, 10), &series(476.0, 0.0, 10)).unwrap();
        assert!((r.tpt_gain_pct - 5.882).abs() < 0.05, "{}", r.tpt_gain_pct);
    }

    #[test]
    fn bler_reduction_matches_reference_numbers() {
        // 0.002 vs 0.007 is a ~71.4% reduction.
        let r = compare(&series(0.0, 0.002, 10), &series(0.0, 0.007, 10)).unwrap();
        assert!(
            (r.bler_reduction_pct - 71.428).abs() < 0.05,
            "{}",
            r.bler_reduction_pct
        );
    }

    #[test]
    fn identical_series_have_zero_deltas() {
        let a = series(100.0, 0.05, 5);
        let r = compare(&a, &a).unwrap();
        assert_eq!(r.tpt_gain_pct, 0.0);
        assert_eq!(r.bler_reduction_pct, 0.0);
    }

    #[test]
    fn length_mismatch_errors() {
        let a = series(1.0, 0.0, 5);
        let b = series(1.0, 0.0, 6);
        assert!(matches!(
            compare(&a, &b),
            Err(BenchError::LengthMismatch { a: 5, b: 6 })
        ));
    }
}
