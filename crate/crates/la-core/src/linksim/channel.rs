//! First-order autoregressive SINR process with a seeded random stream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// True channel state plus the systematic impairment the SINR-to-BLER table
/// does not see.
#[derive(Debug, Clone)]
pub struct ChannelState {
    /// Current true SINR, dB.
    pub true_sinr_db: f64,
    /// Process mean, dB.
    pub mean_sinr_db: f64,
    /// AR(1) correlation in [0, 1].
    pub correlation: f64,
    /// Stationary standard deviation, dB.
    pub volatility_db: f64,
    /// Systematic bias applied at transmission time but absent from CQI, dB.
    pub impairment_offset_db: f64,
    rng: ChaCha8Rng,
}

impl ChannelState {
    /// Start the process at its mean.
    pub fn new(
        mean_sinr_db: f64,
        correlation: f64,
        volatility_db: f64,
        impairment_offset_db: f64,
        seed: u64,
    ) -> Self {
        Self {
            true_sinr_db: mean_sinr_db,
            mean_sinr_db,
            correlation,
            volatility_db,
            impairment_offset_db,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Advance one TTI: `s' = mu + rho (s - mu) + sigma sqrt(1 - rho^2) eps`.
    ///
    /// Draws exactly one standard-normal sample from the stream.
    pub fn evolve(&mut self) {
        let eps: f64 = self.rng.sample(StandardNormal);
        let rho = self.correlation;
        self.true_sinr_db = self.mean_sinr_db
            + rho * (self.true_sinr_db - self.mean_sinr_db)
            + self.volatility_db * libm::sqrt(1.0 - rho * rho) * eps;
    }

    /// Move the process mean abruptly, shifting the current state with it
    /// (a blockage-style collapse rather than a slow relaxation).
    pub fn shift_mean(&mut self, new_mean_db: f64) {
        let delta = new_mean_db - self.mean_sinr_db;
        self.mean_sinr_db = new_mean_db;
        self.true_sinr_db += delta;
    }

    /// Bernoulli ACK draw from the channel's stream.
    pub(crate) fn draw_ack(&mut self, bler_prob: f64) -> bool {
        self.rng.random_bool((1.0 - bler_prob).clamp(0.0, 1.0))
    }
}
