//! State encoding and the relative action grid.

use crate::situation::FORECAST_HORIZON;
use crate::types::{LinkAction, Mode, STATE_DIM};

/// Number of discrete actions: 5 MCS deltas x 2 ranks.
pub const ACTION_COUNT: usize = 10;

/// MCS index deltas covered by the action grid.
pub const ACTION_DELTAS: [i8; 5] = [-2, -1, 0, 1, 2];

/// Feature clamp bounds.
const FEATURE_MIN: f64 = -1.0;
const FEATURE_MAX: f64 = 1.5;

/// Encoded controller state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub [f64; STATE_DIM]);

/// Raw quantities that feed the encoder.
#[derive(Debug, Clone)]
pub struct FeatureInputs {
    pub filtered_sinr_db: f64,
    pub sinr_trend_db_per_tti: f64,
    pub cqi: u8,
    pub windowed_bler: f64,
    pub bler_forecast: [f64; FORECAST_HORIZON],
    pub current: LinkAction,
    pub mode: Mode,
    pub ttis_since_mode_switch: u64,
    pub last_ack: bool,
    /// OLLA-equivalent mismatch offset maintained by the agent, dB.
    pub olla_equiv_offset_db: f64,
}

/// Build the 16-feature vector; every component is clamped into
/// `[-1, 1.5]`.
pub fn encode_state(inp: &FeatureInputs) -> StateVector {
    let mut f = [0.0; STATE_DIM];
    f[0] = inp.filtered_sinr_db / 40.0;
    f[1] = inp.sinr_trend_db_per_tti / 0.5;
    f[2] = f64::from(inp.cqi) / 15.0;
    f[3] = inp.windowed_bler;
    f[4..9].copy_from_slice(&inp.bler_forecast);
    f[9] = f64::from(inp.current.mcs_index()) / 28.0;
    f[10] = f64::from(inp.current.rank()) - 1.0;
    f[11] = match inp.mode {
        Mode::Embb => 0.0,
        Mode::Urllc => 1.0,
    };
    f[12] = (inp.ttis_since_mode_switch as f64 / 2000.0).min(1.0);
    f[13] = if inp.last_ack { 1.0 } else { 0.0 };
    f[14] = inp.olla_equiv_offset_db / 10.0;
    f[15] = 1.0;
    for v in f.iter_mut() {
        *v = v.clamp(FEATURE_MIN, FEATURE_MAX);
    }
    StateVector(f)
}

/// Action id for a (delta, rank) grid cell.
pub fn action_id(delta: i8, rank: u8) -> usize {
    debug_assert!((-2..=2).contains(&delta));
    debug_assert!((1..=2).contains(&rank));
    (delta + 2) as usize * 2 + (rank - 1) as usize
}

/// Inverse of [`action_id`].
pub fn action_parts(id: usize) -> (i8, u8) {
    debug_assert!(id < ACTION_COUNT);
    ((id / 2) as i8 - 2, (id % 2) as u8 + 1)
}

/// Apply a delta to an MCS index, clamping into the table.
pub fn apply_delta(mcs_index: u8, delta: i8, top_index: u8) -> u8 {
    let raw = i16::from(mcs_index) + i16::from(delta);
    raw.clamp(0, i16::from(top_index)) as u8
}

/// Grid id nearest to an arbitrary transition `current -> target`; deltas
/// beyond the grid are clamped to +-2.
pub fn nearest_grid_id(current: LinkAction, target: LinkAction) -> usize {
    let delta = (i16::from(target.mcs_index()) - i16::from(current.mcs_index())).clamp(-2, 2);
    action_id(delta as i8, target.rank())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_grid_bijection() {
        let mut seen = [false; ACTION_COUNT];
        for delta in ACTION_DELTAS {
            for rank in [1u8, 2] {
                let id = action_id(delta, rank);
                assert!(!seen[id], "duplicate id {id}");
                seen[id] = true;
                assert_eq!(action_parts(id), (delta, rank));
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn encode_respects_bounds_and_layout() {
        let inp = FeatureInputs {
            filtered_sinr_db: 27.0,
            sinr_trend_db_per_tti: 0.1,
            cqi: 15,
            windowed_bler: 0.25,
            bler_forecast: [0.1, 0.2, 0.3, 0.4, 0.5],
            current: LinkAction::new(14, 2),
            mode: Mode::Urllc,
            ttis_since_mode_switch: 10_000,
            last_ack: true,
            olla_equiv_offset_db: -3.0,
        };
        let s = encode_state(&inp).0;
        assert_eq!(s.len(), STATE_DIM);
        assert!((s[0] - 27.0 / 40.0).abs() < 1e-12);
        assert!((s[9] - 0.5).abs() < 1e-12);
        assert_eq!(s[10], 1.0);
        assert_eq!(s[11], 1.0);
        assert_eq!(s[12], 1.0); // capped
        assert_eq!(s[15], 1.0);
        for v in s {
            assert!((-1.0..=1.5).contains(&v));
        }
    }

    #[test]
    fn encode_clamps_outliers() {
        let inp = FeatureInputs {
            filtered_sinr_db: 500.0,
            sinr_trend_db_per_tti: -40.0,
            cqi: 0,
            windowed_bler: 0.0,
            bler_forecast: [0.0; 5],
            current: LinkAction::new(0, 1),
            mode: Mode::Embb,
            ttis_since_mode_switch: 0,
            last_ack: false,
            olla_equiv_offset_db: 99.0,
        };
        let s = encode_state(&inp).0;
        assert_eq!(s[0], 1.5);
        assert_eq!(s[1], -1.0);
        assert_eq!(s[14], 1.5);
    }

    #[test]
    fn delta_application_clamps_at_bounds() {
        assert_eq!(apply_delta(0, -2, 28), 0);
        assert_eq!(apply_delta(27, 2, 28), 28);
        assert_eq!(apply_delta(10, 1, 28), 11);
    }

    #[test]
    fn nearest_grid_clamps_large_jumps() {
        let cur = LinkAction::new(10, 1);
        assert_eq!(
            nearest_grid_id(cur, LinkAction::new(20, 2)),
            action_id(2, 2)
        );
        assert_eq!(
            nearest_grid_id(cur, LinkAction::new(3, 1)),
            action_id(-2, 1)
        );
        assert_eq!(
            nearest_grid_id(cur, LinkAction::new(11, 1)),
            action_id(1, 1)
        );
    }
}
