//! KPI samples, CSV serialization and the run summary.

use std::fs;
use std::path::Path;

use la_core::types::Mode;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

/// One 100 ms aggregation window.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiSample {
    pub sample_idx: u64,
    pub t_ms: u64,
    /// Delivered bits in the window divided by 0.1 s.
    pub dl_tpt_mbps: f64,
    /// NACKs over transport blocks in the window.
    pub bler: f64,
    pub mcs_mean: f64,
    pub rank_mean: f64,
    pub mode: Mode,
}

pub const CSV_HEADER: &str = "sample_idx,t_ms,dl_tpt_mbps,bler,mcs_mean,rank_mean,mode";

impl KpiSample {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{}",
            self.sample_idx,
            self.t_ms,
            self.dl_tpt_mbps,
            self.bler,
            self.mcs_mean,
            self.rank_mean,
            self.mode.name()
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self, BenchError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(BenchError::Sim(format!(
                "bad KPI row: expected 7 fields, got {}",
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64, BenchError> {
            s.parse()
                .map_err(|_| BenchError::Sim(format!("bad float `{s}` in KPI row")))
        };
        let mode = match fields[6] {
            "embb" => Mode::Embb,
            "urllc" => Mode::Urllc,
            other => return Err(BenchError::Sim(format!("bad mode `{other}` in KPI row"))),
        };
        Ok(Self {
            sample_idx: fields[0]
                .parse()
                .map_err(|_| BenchError::Sim("bad sample_idx".into()))?,
            t_ms: fields[1]
                .parse()
                .map_err(|_| BenchError::Sim("bad t_ms".into()))?,
            dl_tpt_mbps: parse_f(fields[2])?,
            bler: parse_f(fields[3])?,
            mcs_mean: parse_f(fields[4])?,
            rank_mean: parse_f(fields[5])?,
            mode,
        })
    }
}

/// Serialize a KPI series; byte-stable for identical inputs.
pub fn to_csv(samples: &[KpiSample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&s.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn write_csv(samples: &[KpiSample], path: &Path) -> Result<(), BenchError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, to_csv(samples))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<KpiSample>, BenchError> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Vec<KpiSample>, BenchError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(BenchError::Sim(format!(
                "bad KPI header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    lines.map(KpiSample::from_csv_line).collect()
}

/// End-of-run aggregate written next to the CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub controller: String,
    pub samples: usize,
    pub duration_s: f64,
    pub mean_dl_tpt_mbps: f64,
    /// Total NACKs over total transport blocks.
    pub mean_bler: f64,
    pub total_delivered_bits: u64,
    pub total_transport_blocks: u64,
    pub total_nacks: u64,
    pub urllc_rank_violations: u64,
    pub urllc_decrement_violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency_p50_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency_p99_ms: Option<f64>,
}
