//! Scalar random-walk Kalman filter for SINR smoothing.

/// Filter state. The level is modelled as a random walk with process noise
/// `q`; measurements carry variance `r` (CQI quantization noise).
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub estimate_db: f64,
    pub variance_db2: f64,
    pub process_noise_q: f64,
    pub measurement_noise_r: f64,
}

impl KalmanState {
    /// Start with an uninformative prior so the first measurement dominates.
    pub fn new(process_noise_q: f64, measurement_noise_r: f64) -> Self {
        Self {
            estimate_db: 0.0,
            variance_db2: 1e6,
            process_noise_q,
            measurement_noise_r,
        }
    }

    /// Predict-update step: inflate variance by `q`, blend the measurement
    /// with gain `var / (var + r)`.
    pub fn update(&mut self, measurement_db: f64) {
        let predicted_var = self.variance_db2 + self.process_noise_q;
        let gain = predicted_var / (predicted_var + self.measurement_noise_r);
        self.estimate_db += gain * (measurement_db - self.estimate_db);
        self.variance_db2 = (1.0 - gain) * predicted_var;
    }
}
