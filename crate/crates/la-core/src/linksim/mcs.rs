//! 3GPP-style modulation and coding scheme table with a logistic BLER model.

use alloc::vec::Vec;

/// Logistic slope of the SINR-to-BLER curve, in dB.
pub const DEFAULT_BLER_SLOPE_DB: f64 = 0.5;

/// Implementation loss added on top of the Shannon-gap SINR threshold, dB.
const IMPL_LOSS_DB: f64 = 2.0;

/// One row of the MCS table.
#[derive(Debug, Clone, PartialEq)]
pub struct McsEntry {
    /// Table index, 0..=28.
    pub index: u8,
    /// Bits per modulation symbol (2 = QPSK, 4 = 16-QAM, 6 = 64-QAM).
    pub modulation_order: u8,
    /// FEC code rate in (0, 1).
    pub code_rate: f64,
    /// Bits per resource element, as quoted by the standard table.
    pub spectral_efficiency: f64,
    /// SINR at which this entry hits 50% BLER, in dB.
    pub sinr_threshold_db: f64,
}

/// The 29-entry 64-QAM table (TS 38.214 style), ordered by spectral
/// efficiency.
///
/// Rows carry the standard's 4-decimal spectral efficiencies; SINR
/// thresholds are Shannon-gap estimates `10*log10(2^SE - 1)` plus a fixed
/// implementation loss. The standard's row order has one inversion at the
/// 16-QAM/64-QAM boundary, so rows are sorted by spectral efficiency to keep
/// the threshold curve strictly increasing.
#[derive(Debug, Clone)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

/// (modulation order, code rate x 1024, quoted spectral efficiency)
const TABLE_ROWS: [(u8, u16, f64); 29] = [
    (2, 120, 0.2344),
    (2, 157, 0.3066),
    (2, 193, 0.3770),
    (2, 251, 0.4902),
    (2, 308, 0.6016),
    (2, 379, 0.7402),
    (2, 449, 0.8770),
    (2, 526, 1.0273),
    (2, 602, 1.1758),
    (2, 679, 1.3262),
    (4, 340, 1.3281),
    (4, 378, 1.4766),
    (4, 434, 1.6953),
    (4, 490, 1.9141),
    (4, 553, 2.1602),
    (4, 616, 2.4063),
    (4, 658, 2.5703),
    (6, 438, 2.5664),
    (6, 466, 2.7305),
    (6, 517, 3.0293),
    (6, 567, 3.3223),
    (6, 616, 3.6094),
    (6, 666, 3.9023),
    (6, 719, 4.2129),
    (6, 772, 4.5234),
    (6, 822, 4.8164),
    (6, 873, 5.1152),
    (6, 910, 5.3320),
    (6, 948, 5.5547),
];

impl McsTable {
    /// Build the standard table.
    pub fn standard() -> Self {
        let mut rows: Vec<(u8, u16, f64)> = TABLE_ROWS.to_vec();
        rows.sort_by(|a, b| a.2.partial_cmp(&b.2).expect("finite spectral efficiency"));
        let entries = rows
            .into_iter()
            .enumerate()
            .map(|(i, (qm, r1024, se))| McsEntry {
                index: i as u8,
                modulation_order: qm,
                code_rate: f64::from(r1024) / 1024.0,
                spectral_efficiency: se,
                sinr_threshold_db: sinr_threshold_db(se),
            })
            .collect();
        Self { entries }
    }

    #[cfg(test)]
    pub(crate) fn from_entries(entries: Vec<McsEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest valid index.
    pub fn top_index(&self) -> u8 {
        (self.entries.len() - 1) as u8
    }

    pub fn entry(&self, index: u8) -> Option<&McsEntry> {
        self.entries.get(index as usize)
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// Spectral efficiency of the top entry.
    pub fn max_spectral_efficiency(&self) -> f64 {
        self.entries[self.entries.len() - 1].spectral_efficiency
    }
}

/// 50%-BLER SINR point for a given spectral efficiency.
fn sinr_threshold_db(se: f64) -> f64 {
    10.0 * libm::log10(libm::exp2(se) - 1.0) + IMPL_LOSS_DB
}

/// Block error probability of `entry` at the given effective SINR, using the
/// default logistic slope.
pub fn bler(entry: &McsEntry, effective_sinr_db: f64) -> f64 {
    bler_with_slope(entry, effective_sinr_db, DEFAULT_BLER_SLOPE_DB)
}

/// Logistic SINR-to-BLER curve: 0.5 at the entry threshold, falling as SINR
/// rises. Clamped into the open interval so extreme SINR cannot round to an
/// exact 0 or 1.
pub fn bler_with_slope(entry: &McsEntry, effective_sinr_db: f64, slope_db: f64) -> f64 {
    let p = 1.0 / (1.0 + libm::exp((effective_sinr_db - entry.sinr_threshold_db) / slope_db));
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Transport block size in bits for one TTI: per-layer payload times rank.
///
/// The per-layer payload is floored before multiplying by rank so that a
/// rank-2 block is exactly twice a rank-1 block.
pub fn tbs_bits(entry: &McsEntry, rank: u8, data_res_per_tti: u32) -> u64 {
    let per_layer = libm::floor(entry.spectral_efficiency * f64::from(data_res_per_tti)) as u64;
    per_layer * u64::from(rank)
}
