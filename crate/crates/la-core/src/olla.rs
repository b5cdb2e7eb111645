//! Outer Loop Link Adaptation baseline controller.
//!
//! Inner loop: map the CQI-implied SINR minus an outer-loop offset to the
//! largest MCS whose predicted BLER stays under the target. Outer loop: nudge
//! the offset up on NACK and down on ACK with the step ratio chosen so the
//! expected drift is zero exactly at the target BLER.

use crate::agent::{parse_directive, Directive, DirectiveError};
use crate::linksim::{bler_with_slope, dequantize_cqi, McsTable, Observation, TransmissionOutcome};
use crate::types::{LinkAction, Mode};
use crate::LinkController;

/// Outer-loop offset state and its update constants.
#[derive(Debug, Clone, PartialEq)]
pub struct OllaState {
    /// Offset subtracted from the CQI-implied SINR, dB.
    pub offset_db: f64,
    /// Offset increase per NACK, dB.
    pub step_up_db: f64,
    /// Offset decrease per ACK, dB (derived from the target).
    pub step_down_db: f64,
    /// BLER the loop converges to.
    pub bler_target: f64,
    pub offset_min_db: f64,
    pub offset_max_db: f64,
}

impl OllaState {
    /// Build a state with `step_down = step_up * target / (1 - target)`,
    /// the zero-drift fixed point condition.
    pub fn new(step_up_db: f64, bler_target: f64, clamp_db: f64) -> Self {
        Self {
            offset_db: 0.0,
            step_up_db,
            step_down_db: step_up_db * bler_target / (1.0 - bler_target),
            bler_target,
            offset_min_db: -clamp_db,
            offset_max_db: clamp_db,
        }
    }

    /// Re-derive the step ratio for a new target, keeping the offset.
    pub fn retarget(&mut self, bler_target: f64) {
        self.bler_target = bler_target;
        self.step_down_db = self.step_up_db * bler_target / (1.0 - bler_target);
    }
}

/// ACK/NACK update: NACK raises the offset, ACK lowers it, then clamp.
pub fn outer_loop_update(state: &mut OllaState, ack: bool) {
    if ack {
        state.offset_db -= state.step_down_db;
    } else {
        state.offset_db += state.step_up_db;
    }
    state.offset_db = state.offset_db.clamp(state.offset_min_db, state.offset_max_db);
}

/// Largest MCS index whose ideal-table BLER at `cqi_sinr - offset` stays at
/// or below the target; index 0 when even the most robust entry misses it.
pub fn inner_loop_select(
    cqi_sinr_db: f64,
    offset_db: f64,
    table: &McsTable,
    bler_target: f64,
    slope_db: f64,
) -> u8 {
    let sinr = cqi_sinr_db - offset_db;
    for entry in table.entries().iter().rev() {
        if bler_with_slope(entry, sinr, slope_db) <= bler_target {
            return entry.index;
        }
    }
    0
}

/// Baseline controller configuration.
#[derive(Debug, Clone)]
pub struct OllaParams {
    pub step_up_db: f64,
    pub offset_clamp_db: f64,
    pub bler_slope_db: f64,
}

impl Default for OllaParams {
    fn default() -> Self {
        Self {
            step_up_db: 0.5,
            offset_clamp_db: 10.0,
            bler_slope_db: crate::linksim::DEFAULT_BLER_SLOPE_DB,
        }
    }
}

/// The complete baseline: inner-loop lookup plus outer-loop offset, with a
/// fixed rank policy per service class (rank 2 for eMBB, rank 1 for URLLC).
#[derive(Debug, Clone)]
pub struct OllaController {
    state: OllaState,
    params: OllaParams,
    mode: Mode,
    table: McsTable,
}

impl OllaController {
    pub fn new(params: OllaParams, mode: Mode, table: McsTable) -> Self {
        let state = OllaState::new(params.step_up_db, mode.bler_target(), params.offset_clamp_db);
        Self {
            state,
            params,
            mode,
            table,
        }
    }

    pub fn state(&self) -> &OllaState {
        &self.state
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
        self.state.retarget(mode.bler_target());
    }

    fn rank_for_mode(&self) -> u8 {
        match self.mode {
            Mode::Embb => 2,
            Mode::Urllc => 1,
        }
    }
}

impl LinkController for OllaController {
    fn decide(&mut self, obs: &Observation) -> LinkAction {
        let cqi_sinr = dequantize_cqi(obs.cqi);
        let idx = inner_loop_select(
            cqi_sinr,
            self.state.offset_db,
            &self.table,
            self.mode.bler_target(),
            self.params.bler_slope_db,
        );
        LinkAction::new(idx, self.rank_for_mode())
    }

    fn observe(&mut self, outcome: &TransmissionOutcome) {
        outer_loop_update(&mut self.state, outcome.ack);
    }

    fn submit_directive(&mut self, raw: &str) -> Result<(), DirectiveError> {
        // The baseline only understands mode switches; other well-formed
        // directives are accepted and ignored.
        match parse_directive(raw)? {
            Directive::Mode(mode) => self.set_mode(mode),
            _ => {}
        }
        Ok(())
    }
}
