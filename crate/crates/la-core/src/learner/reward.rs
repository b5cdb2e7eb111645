//! Mode-weighted reward functions.

use crate::linksim::{tbs_bits, GridConfig, McsTable, TransmissionOutcome};
use crate::types::Mode;

/// Normalisation constants derived from the table and grid.
#[derive(Debug, Clone, Copy)]
pub struct RewardScale {
    /// Transport block size of the top entry at rank 2.
    pub tbs_max_bits: u64,
    /// Spectral efficiency of the top entry.
    pub se_max: f64,
}

impl RewardScale {
    pub fn from_table(table: &McsTable, grid: &GridConfig) -> Self {
        let top = table.entry(table.top_index()).expect("non-empty table");
        Self {
            tbs_max_bits: tbs_bits(top, 2, grid.data_res_per_tti()),
            se_max: top.spectral_efficiency,
        }
    }
}

/// Per-transmission reward.
///
/// eMBB trades normalised delivered payload against windowed BLER overshoot:
/// `delivered/tbs_max - 2*max(0, bler - 0.10)`, range [-2, 1].
/// URLLC pays a flat -10 per NACK and earns normalised spectral efficiency
/// per ACK, range [-10, 1].
pub fn reward(
    mode: Mode,
    outcome: &TransmissionOutcome,
    windowed_bler: f64,
    table: &McsTable,
    scale: &RewardScale,
) -> f64 {
    match mode {
        Mode::Embb => {
            let delivered = outcome.delivered_bits as f64 / scale.tbs_max_bits as f64;
            delivered - 2.0 * (windowed_bler - 0.10).max(0.0)
        }
        Mode::Urllc => {
            if outcome.ack {
                let se = table
                    .entry(outcome.mcs_index)
                    .map(|e| e.spectral_efficiency)
                    .unwrap_or(0.0);
                se / scale.se_max
            } else {
                -10.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LinkAction;

    fn outcome(ack: bool, mcs: u8, rank: u8, table: &McsTable, grid: &GridConfig) -> TransmissionOutcome {
        let e = table.entry(mcs).unwrap();
        let tbs = tbs_bits(e, rank, grid.data_res_per_tti());
        TransmissionOutcome {
            tti: 0,
            ack,
            tbs_bits: tbs,
            delivered_bits: if ack { tbs } else { 0 },
            bler_prob: 0.1,
            mcs_index: mcs,
            rank,
        }
    }

    #[test]
    fn embb_ack_at_top_is_unit_reward() {
        let table = McsTable::standard();
        let grid = GridConfig::default();
        let scale = RewardScale::from_table(&table, &grid);
        let out = outcome(true, table.top_index(), 2, &table, &grid);
        let r = reward(Mode::Embb, &out, 0.05, &table, &scale);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn urllc_nack_is_minus_ten() {
        let table = McsTable::standard();
        let grid = GridConfig::default();
        let scale = RewardScale::from_table(&table, &grid);
        let out = outcome(false, 10, 1, &table, &grid);
        assert_eq!(reward(Mode::Urllc, &out, 0.0, &table, &scale), -10.0);
    }

    #[test]
    fn embb_nack_with_bler_overshoot() {
        let table = McsTable::standard();
        let grid = GridConfig::default();
        let scale = RewardScale::from_table(&table, &grid);
        let out = outcome(false, 10, 2, &table, &grid);
        let r = reward(Mode::Embb, &out, 0.20, &table, &scale);
        assert!((r - (-0.2)).abs() < 1e-12);
    }

    #[test]
    fn reward_bounds_hold_over_sweep() {
        let table = McsTable::standard();
        let grid = GridConfig::default();
        let scale = RewardScale::from_table(&table, &grid);
        for mcs in 0..=table.top_index() {
            for rank in [1u8, 2] {
                for ack in [false, true] {
                    for bler_pct in 0..=100 {
                        let wb = bler_pct as f64 / 100.0;
                        let out = outcome(ack, mcs, rank, &table, &grid);
                        let re = reward(Mode::Embb, &out, wb, &table, &scale);
                        assert!((-2.0..=1.0).contains(&re), "embb {re}");
                        let ru = reward(Mode::Urllc, &out, wb, &table, &scale);
                        assert!((-10.0..=1.0).contains(&ru), "urllc {ru}");
                    }
                }
            }
        }
    }

    #[test]
    fn urllc_ack_reward_scales_with_spectral_efficiency() {
        let table = McsTable::standard();
        let grid = GridConfig::default();
        let scale = RewardScale::from_table(&table, &grid);
        let low = reward(Mode::Urllc, &outcome(true, 0, 1, &table, &grid), 0.0, &table, &scale);
        let high = reward(
            Mode::Urllc,
            &outcome(true, 28, 1, &table, &grid),
            0.0,
            &table,
            &scale,
        );
        assert!(low > 0.0 && low < high);
        assert!((high - 1.0).abs() < 1e-12);
        let _ = LinkAction::new(0, 1);
    }
}
