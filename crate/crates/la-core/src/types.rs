//! Domain types shared across the simulator, the baseline and the agent.

/// Number of features in an encoded controller state vector.
pub const STATE_DIM: usize = 16;

/// Convenience alias for a raw feature vector.
pub type StateDim = [f64; STATE_DIM];

/// Service class of the active traffic, which fixes the BLER target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Throughput-oriented broadband traffic, BLER target 10^-1.
    Embb,
    /// Reliability/latency-oriented traffic, BLER target 10^-3.
    Urllc,
}

impl Mode {
    /// Block error rate target tied to the service class.
    pub fn bler_target(self) -> f64 {
        match self {
            Mode::Embb => 0.10,
            Mode::Urllc => 0.001,
        }
    }

    /// Stable lowercase name used in files and telemetry.
    pub fn name(self) -> &'static str {
        match self {
            Mode::Embb => "embb",
            Mode::Urllc => "urllc",
        }
    }
}

/// The command a controller emits each TTI: an MCS table index and the
/// number of spatial layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkAction {
    mcs_index: u8,
    rank: u8,
}

impl LinkAction {
    /// Highest valid MCS index of the shipped table.
    pub const MAX_MCS_INDEX: u8 = 28;

    /// Build an action, clamping both fields into their valid ranges.
    pub fn new(mcs_index: u8, rank: u8) -> Self {
        Self {
            mcs_index: mcs_index.min(Self::MAX_MCS_INDEX),
            rank: rank.clamp(1, 2),
        }
    }

    pub fn mcs_index(self) -> u8 {
        self.mcs_index
    }

    pub fn rank(self) -> u8 {
        self.rank
    }

    /// Copy with a different MCS index (clamped).
    pub fn with_mcs(self, mcs_index: u8) -> Self {
        Self::new(mcs_index, self.rank)
    }

    /// Copy with a different rank (clamped).
    pub fn with_rank(self, rank: u8) -> Self {
        Self::new(self.mcs_index, rank)
    }
}
