//! Scenario runner, KPI aggregation, baseline comparison, checkpoint
//! handling and the training loop around [`la_core`].

pub mod checkpoint;
pub mod compare;
pub mod error;
pub mod kpi;
pub mod latency;
pub mod runner;
pub mod scenario;
pub mod trainer;

pub use error::BenchError;
