//! Deterministic, seeded link-level downlink simulator.
//!
//! One simulator instance owns a time-correlated SINR process, the MCS
//! table, a logistic SINR-to-BLER ground-truth curve, CQI quantization with
//! feedback delay, and per-transport-block accounting. The CQI reported to
//! controllers deliberately excludes the channel's impairment offset: that
//! systematic model mismatch is exactly what adaptive controllers have to
//! absorb.

mod channel;
mod mcs;
mod sim;

pub use channel::ChannelState;
pub use mcs::{bler, bler_with_slope, tbs_bits, McsEntry, McsTable, DEFAULT_BLER_SLOPE_DB};
pub use sim::{
    dequantize_cqi, quantize_cqi, quantize_cqi_value, GridConfig, LinkSim, LinkSimError,
    Observation, TransmissionOutcome, CQI_MAX,
};
