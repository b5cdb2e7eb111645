//! Situation awareness: signal conditioning, Kalman SINR estimation,
//! short-horizon BLER forecasting and a structured summary for the decision
//! stages.

mod kalman;
mod predictor;
mod window;

pub use kalman::KalmanState;
pub use predictor::{fit_window, ArModel, RidgeArPredictor, AR_ORDER};
pub use window::{sliding_mean, SignalWindow, WINDOW_CAPACITY};

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::linksim::{bler_with_slope, McsEntry};

/// Forecast horizon in TTIs.
pub const FORECAST_HORIZON: usize = 5;

/// TTIs used for the trend slope estimate.
pub const TREND_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SituationError {
    /// Not enough history yet for the requested product.
    #[error("window not yet warm")]
    ColdStart,
    #[error("empty window")]
    EmptyWindow,
}

/// Rate-change suggestion attached to a summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Raise,
    Hold,
    Lower,
}

/// Immutable snapshot handed to the goal-selection stages.
#[derive(Debug, Clone, PartialEq)]
pub struct SituationSummary {
    pub filtered_sinr_db: f64,
    pub sinr_trend_db_per_tti: f64,
    pub windowed_bler: f64,
    /// Predicted BLER at the current MCS for the next 5 TTIs.
    pub bler_forecast: [f64; FORECAST_HORIZON],
    /// True when any forecast element breaches the active BLER target.
    pub vulnerability: bool,
    pub suggested_direction: Direction,
}

/// Tuning knobs for the perception pipeline.
#[derive(Debug, Clone)]
pub struct SituationParams {
    pub window_capacity: usize,
    pub kalman_q: f64,
    pub kalman_r: f64,
    pub ar_order: usize,
    pub ridge_lambda: f64,
    pub ar_forget: f64,
    /// Optional median-of-5 pre-stage for impulse suppression.
    pub median_prefilter: bool,
}

impl Default for SituationParams {
    fn default() -> Self {
        Self {
            window_capacity: WINDOW_CAPACITY,
            kalman_q: 0.01,
            kalman_r: 1.0,
            ar_order: AR_ORDER,
            ridge_lambda: 1.0,
            ar_forget: 0.9999,
            median_prefilter: false,
        }
    }
}

/// The perception pipeline: measurement -> (median) -> Kalman -> window,
/// with the AR predictor fed in parallel.
#[derive(Debug, Clone)]
pub struct Situation {
    params: SituationParams,
    window: SignalWindow,
    kalman: KalmanState,
    predictor: RidgeArPredictor,
    median_buf: VecDeque<f64>,
}

impl Situation {
    pub fn new(params: SituationParams) -> Self {
        let window = SignalWindow::new(params.window_capacity);
        let kalman = KalmanState::new(params.kalman_q, params.kalman_r);
        let predictor = RidgeArPredictor::new(params.ar_order, params.ridge_lambda, params.ar_forget);
        Self {
            params,
            window,
            kalman,
            predictor,
            median_buf: VecDeque::with_capacity(6),
        }
    }

    pub fn window(&self) -> &SignalWindow {
        &self.window
    }

    pub fn kalman(&self) -> &KalmanState {
        &self.kalman
    }

    pub fn predictor(&self) -> &RidgeArPredictor {
        &self.predictor
    }

    /// Latest filtered SINR estimate.
    pub fn filtered_sinr_db(&self) -> f64 {
        self.kalman.estimate_db
    }

    pub fn windowed_bler(&self) -> f64 {
        self.window.windowed_bler()
    }

    pub fn is_warm(&self) -> bool {
        self.window.is_warm()
    }

    /// Ingest one TTI of feedback: a raw SINR measurement plus the ACK bit
    /// and delivered payload of the transmission it accompanied.
    pub fn ingest(&mut self, sinr_measurement_db: f64, ack: bool, delivered_bits: u64) {
        let conditioned = if self.params.median_prefilter {
            self.median_buf.push_back(sinr_measurement_db);
            while self.median_buf.len() > 5 {
                self.median_buf.pop_front();
            }
            median_of(self.median_buf.iter().copied())
        } else {
            sinr_measurement_db
        };
        self.kalman.update(conditioned);
        let filtered = self.kalman.estimate_db;
        self.window.push(filtered, ack, delivered_bits);
        self.predictor.observe(filtered);
    }

    /// Predicted filtered SINR for the next `FORECAST_HORIZON` TTIs.
    pub fn forecast_sinr(&self) -> Result<[f64; FORECAST_HORIZON], SituationError> {
        if !self.window.is_warm() {
            return Err(SituationError::ColdStart);
        }
        let series = self.window.sinr_series();
        let preds = self.predictor.forecast(&series, FORECAST_HORIZON);
        let mut out = [0.0; FORECAST_HORIZON];
        out.copy_from_slice(&preds);
        Ok(out)
    }

    /// Predicted BLER at `entry` for the next 5 TTIs: the SINR forecast
    /// mapped through the logistic curve.
    pub fn forecast_bler(
        &self,
        entry: &McsEntry,
        slope_db: f64,
    ) -> Result<[f64; FORECAST_HORIZON], SituationError> {
        let sinr = self.forecast_sinr()?;
        Ok(sinr.map(|s| bler_with_slope(entry, s, slope_db)))
    }

    /// Least-squares slope of the last `TREND_WINDOW` filtered values,
    /// dB per TTI.
    pub fn trend_db_per_tti(&self) -> f64 {
        let tail = self.window.sinr_tail(TREND_WINDOW);
        least_squares_slope(&tail)
    }

    /// Build the full situation snapshot for the active BLER target and the
    /// currently used MCS entry.
    pub fn summarize(
        &self,
        active_target: f64,
        current_entry: &McsEntry,
        slope_db: f64,
    ) -> Result<SituationSummary, SituationError> {
        let bler_forecast = self.forecast_bler(current_entry, slope_db)?;
        let windowed_bler = self.window.windowed_bler();
        let trend = self.trend_db_per_tti();
        let vulnerability = bler_forecast.iter().any(|p| *p > active_target);
        let suggested_direction = if vulnerability {
            Direction::Lower
        } else if windowed_bler < 0.2 * active_target && trend >= 0.0 {
            Direction::Raise
        } else {
            Direction::Hold
        };
        Ok(SituationSummary {
            filtered_sinr_db: self.kalman.estimate_db,
            sinr_trend_db_per_tti: trend,
            windowed_bler,
            bler_forecast,
            vulnerability,
            suggested_direction,
        })
    }
}

/// Slope of the least-squares line through equally spaced values.
fn least_squares_slope(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean_x = (nf - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / nf;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

fn median_of(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite measurements"));
    v[v.len() / 2]
}
