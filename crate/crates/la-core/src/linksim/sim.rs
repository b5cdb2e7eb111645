//! Per-TTI transmission accounting and delayed CQI reporting.

use alloc::collections::VecDeque;

use super::channel::ChannelState;
use super::mcs::{bler_with_slope, tbs_bits, McsTable, DEFAULT_BLER_SLOPE_DB};
use crate::types::{LinkAction, Mode};

/// Highest CQI index.
pub const CQI_MAX: u8 = 15;

/// CQI bin width in dB.
const CQI_STEP_DB: f64 = 2.4;

/// SINR mapped to CQI 0, dB.
const CQI_ORIGIN_DB: f64 = -8.0;

/// Resource grid and link-model constants for one simulated cell.
#[derive(Debug, Clone)]
pub struct GridConfig {
    /// Physical resource blocks in the carrier.
    pub prb_count: u32,
    /// Data resource elements per PRB per TTI (after overhead).
    pub data_re_per_prb: u32,
    /// TTI duration in milliseconds.
    pub tti_ms: f64,
    /// CQI/HARQ round-trip delay in TTIs.
    pub feedback_delay_ttis: usize,
    /// Logistic slope of the BLER curve, dB.
    pub bler_slope_db: f64,
    /// Per-layer SINR loss when transmitting rank 2, dB.
    pub rank_penalty_db: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        // 100 MHz at 30 kHz numerology: 273 PRBs, 14% overhead.
        Self {
            prb_count: 273,
            data_re_per_prb: 144,
            tti_ms: 0.5,
            feedback_delay_ttis: 4,
            bler_slope_db: DEFAULT_BLER_SLOPE_DB,
            rank_penalty_db: 3.0,
        }
    }
}

impl GridConfig {
    /// Data resource elements available per TTI.
    pub fn data_res_per_tti(&self) -> u32 {
        self.prb_count * self.data_re_per_prb
    }

    /// TTIs per second.
    pub fn ttis_per_second(&self) -> u64 {
        libm::round(1000.0 / self.tti_ms) as u64
    }

    /// Per-layer SINR penalty for the given rank, dB.
    pub fn rank_penalty(&self, rank: u8) -> f64 {
        if rank >= 2 {
            self.rank_penalty_db
        } else {
            0.0
        }
    }
}

/// Result of one transport block transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionOutcome {
    pub tti: u64,
    /// true = ACK, false = NACK.
    pub ack: bool,
    /// Bits offered in the transport block.
    pub tbs_bits: u64,
    /// `tbs_bits` on ACK, zero on NACK.
    pub delivered_bits: u64,
    /// Ground-truth block error probability used for the draw.
    pub bler_prob: f64,
    /// Action that produced this block.
    pub mcs_index: u8,
    pub rank: u8,
}

/// Feedback visible to a controller at one TTI.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub tti: u64,
    /// Quantized, delayed channel quality indicator (0 during cold start).
    pub cqi: u8,
    /// ACK/NACK of the most recent transmission.
    pub ack_history_bit: bool,
    /// Bits delivered by the most recent transmission.
    pub delivered_bits: u64,
    /// Service mode currently scheduled.
    pub mode_flag: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkSimError {
    #[error("mcs index {0} outside table range")]
    InvalidAction(u8),
    #[error("cqi requested before {0} SINR samples exist")]
    ColdStart(usize),
}

/// Quantize one SINR value to a CQI index: `clamp(round((s + 8) / 2.4), 0, 15)`.
pub fn quantize_cqi_value(sinr_db: f64) -> u8 {
    let raw = libm::round((sinr_db - CQI_ORIGIN_DB) / CQI_STEP_DB);
    raw.clamp(0.0, f64::from(CQI_MAX)) as u8
}

/// CQI for the SINR observed `feedback_delay` TTIs ago.
///
/// The queue holds past true SINR values, oldest first, capped at the
/// feedback delay; the impairment offset is deliberately not included.
pub fn quantize_cqi(queue: &VecDeque<f64>, feedback_delay: usize) -> Result<u8, LinkSimError> {
    if queue.len() < feedback_delay {
        return Err(LinkSimError::ColdStart(feedback_delay));
    }
    let delayed = queue[queue.len() - feedback_delay];
    Ok(quantize_cqi_value(delayed))
}

/// Midpoint of a CQI bin, the inverse of [`quantize_cqi_value`].
pub fn dequantize_cqi(cqi: u8) -> f64 {
    CQI_ORIGIN_DB + CQI_STEP_DB * f64::from(cqi.min(CQI_MAX))
}

/// One simulated downlink: channel, table, grid and the CQI delay line.
#[derive(Debug, Clone)]
pub struct LinkSim {
    channel: ChannelState,
    table: McsTable,
    grid: GridConfig,
    sinr_history: VecDeque<f64>,
}

impl LinkSim {
    pub fn new(channel: ChannelState, table: McsTable, grid: GridConfig) -> Self {
        let cap = grid.feedback_delay_ttis;
        Self {
            channel,
            table,
            grid,
            sinr_history: VecDeque::with_capacity(cap + 1),
        }
    }

    pub fn table(&self) -> &McsTable {
        &self.table
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }

    pub fn channel(&self) -> &ChannelState {
        &self.channel
    }

    pub fn channel_mut(&mut self) -> &mut ChannelState {
        &mut self.channel
    }

    /// Delayed CQI for the current TTI.
    pub fn cqi(&self) -> Result<u8, LinkSimError> {
        quantize_cqi(&self.sinr_history, self.grid.feedback_delay_ttis)
    }

    /// Transmit one transport block with the current channel state.
    pub fn transmit(
        &mut self,
        action: LinkAction,
        tti: u64,
    ) -> Result<TransmissionOutcome, LinkSimError> {
        let entry = self
            .table
            .entry(action.mcs_index())
            .ok_or(LinkSimError::InvalidAction(action.mcs_index()))?;
        let effective_sinr = self.channel.true_sinr_db + self.channel.impairment_offset_db
            - self.grid.rank_penalty(action.rank());
        let p = bler_with_slope(entry, effective_sinr, self.grid.bler_slope_db);
        let ack = self.channel.draw_ack(p);
        let tbs = tbs_bits(entry, action.rank(), self.grid.data_res_per_tti());
        Ok(TransmissionOutcome {
            tti,
            ack,
            tbs_bits: tbs,
            delivered_bits: if ack { tbs } else { 0 },
            bler_prob: p,
            mcs_index: action.mcs_index(),
            rank: action.rank(),
        })
    }

    /// Close the TTI: record the current SINR for delayed CQI reporting and
    /// evolve the channel.
    pub fn advance(&mut self) {
        self.sinr_history.push_back(self.channel.true_sinr_db);
        while self.sinr_history.len() > self.grid.feedback_delay_ttis {
            self.sinr_history.pop_front();
        }
        self.channel.evolve();
    }
}
