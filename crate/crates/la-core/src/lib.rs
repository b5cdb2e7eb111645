//! Link-level downlink simulation and an autonomous link adaptation agent.
//!
//! The crate is organised around a seeded fading-channel simulator with a
//! 3GPP-style MCS table ([`linksim`]), a classic outer-loop link adaptation
//! baseline ([`olla`]), and the cognitive controller that competes with it:
//! signal conditioning and short-horizon forecasting ([`situation`]),
//! episodic memory plus a deterministic rule base ([`memory`]), value
//! learning ([`learner`]), and the coordinated proactive/reactive runtime
//! ([`agent`]).
//!
//! Everything here is `no_std + alloc` and free of I/O; scenario files, KPI
//! output, checkpoints and the CLI live in the companion `la-bench` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agent;
pub mod learner;
pub mod linksim;
pub mod memory;
pub mod olla;
pub mod situation;
pub mod types;

pub use types::{LinkAction, Mode, StateDim, STATE_DIM};

use agent::DirectiveError;
use linksim::{Observation, TransmissionOutcome};

/// Per-TTI decision loop implemented by both the OLLA baseline and the agent.
///
/// The driving loop calls [`decide`](LinkController::decide) exactly once per
/// TTI, transmits the returned action, then reports the result through
/// [`observe`](LinkController::observe).
pub trait LinkController {
    /// Produce the link action for this TTI.
    fn decide(&mut self, obs: &Observation) -> LinkAction;

    /// Feed back the outcome of the transmission decided this TTI.
    fn observe(&mut self, outcome: &TransmissionOutcome);

    /// Submit a raw operator directive (e.g. `mode urllc`).
    ///
    /// Malformed directives are rejected and must not change controller
    /// state.
    fn submit_directive(&mut self, raw: &str) -> Result<(), DirectiveError>;
}
