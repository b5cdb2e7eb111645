//! Harness error type with a machine-readable JSON rendering.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("checkpoint missing: {0}")]
    CheckpointMissing(PathBuf),
    #[error("invalid checkpoint: {0}")]
    CheckpointInvalid(String),
    #[error("KPI series length mismatch: {a} vs {b} samples")]
    LengthMismatch { a: usize, b: usize },
    #[error("no latency samples recorded")]
    NoSamples,
    #[error("simulation error: {0}")]
    Sim(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Stable kind tag for machine consumption.
    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::InvalidScenario(_) => "InvalidScenario",
            BenchError::CheckpointMissing(_) => "CheckpointMissing",
            BenchError::CheckpointInvalid(_) => "CheckpointInvalid",
            BenchError::LengthMismatch { .. } => "LengthMismatch",
            BenchError::NoSamples => "NoSamples",
            BenchError::Sim(_) => "Sim",
            BenchError::Io(_) => "Io",
        }
    }

    /// `{"error":{"kind":...,"message":...}}`
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        })
        .to_string()
    }
}
