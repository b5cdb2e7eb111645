//! Ridge-regularized autoregressive SINR predictor.
//!
//! The predictor keeps exponentially-forgotten sufficient statistics of the
//! whole observed series and solves the centered ridge normal equations on
//! demand, so its accuracy keeps improving past the 100-sample window it is
//! queried with. Until enough history has accumulated it falls back to
//! fitting the query window alone. A trained recurrent model could sit
//! behind the same interface.

use alloc::vec;
use alloc::vec::Vec;

/// Default autoregressive order.
pub const AR_ORDER: usize = 8;

/// Fitted one-step model: `x_t = intercept + sum_j beta[j] * x_{t-1-j}`.
#[derive(Debug, Clone)]
pub struct ArModel {
    pub beta: Vec<f64>,
    pub intercept: f64,
}

impl ArModel {
    /// Roll the model forward `horizon` steps from a series tail
    /// (oldest first, at least `order` values).
    pub fn roll_forward(&self, tail: &[f64], horizon: usize) -> Vec<f64> {
        let order = self.beta.len();
        // lags[j] = value j+1 steps back
        let mut lags: Vec<f64> = tail.iter().rev().take(order).copied().collect();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let mut pred = self.intercept;
            for (j, b) in self.beta.iter().enumerate() {
                pred += b * lags[j];
            }
            out.push(pred);
            lags.rotate_right(1);
            lags[0] = pred;
        }
        out
    }
}

/// Accumulating ridge AR estimator with per-sample forgetting.
#[derive(Debug, Clone)]
pub struct RidgeArPredictor {
    order: usize,
    /// Ridge weight applied when solving.
    pub ridge_lambda: f64,
    /// Per-sample decay of the sufficient statistics.
    pub forget: f64,
    sxx: Vec<f64>,
    sxy: Vec<f64>,
    sx: Vec<f64>,
    sy: f64,
    sw: f64,
    lags: Vec<f64>,
    seen: u64,
}

impl RidgeArPredictor {
    pub fn new(order: usize, ridge_lambda: f64, forget: f64) -> Self {
        Self {
            order,
            ridge_lambda,
            forget,
            sxx: vec![0.0; order * order],
            sxy: vec![0.0; order],
            sx: vec![0.0; order],
            sy: 0.0,
            sw: 0.0,
            lags: Vec::with_capacity(order),
            seen: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Samples ingested so far.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Ingest the next series value.
    pub fn observe(&mut self, value: f64) {
        if self.lags.len() == self.order {
            let d = self.forget;
            for v in self.sxx.iter_mut() {
                *v *= d;
            }
            for v in self.sxy.iter_mut() {
                *v *= d;
            }
            for v in self.sx.iter_mut() {
                *v *= d;
            }
            self.sy *= d;
            self.sw *= d;
            for i in 0..self.order {
                for j in 0..self.order {
                    self.sxx[i * self.order + j] += self.lags[i] * self.lags[j];
                }
                self.sxy[i] += self.lags[i] * value;
                self.sx[i] += self.lags[i];
            }
            self.sy += value;
            self.sw += 1.0;
        }
        // lags[0] is the newest value.
        self.lags.insert(0, value);
        self.lags.truncate(self.order);
        self.seen += 1;
    }

    /// True once the accumulated statistics are worth more than a window fit.
    fn accumulated_ready(&self) -> bool {
        self.sw >= (4 * self.order) as f64
    }

    /// Solve the centered ridge normal equations from accumulated history,
    /// or from `window` alone while history is short.
    pub fn fit(&self, window: &[f64]) -> ArModel {
        if self.accumulated_ready() {
            solve_centered_ridge(
                self.order,
                &self.sxx,
                &self.sxy,
                &self.sx,
                self.sy,
                self.sw,
                self.ridge_lambda,
            )
        } else {
            fit_window(window, self.order, self.ridge_lambda)
        }
    }

    /// Fit and roll forward `horizon` steps from the window tail.
    pub fn forecast(&self, window: &[f64], horizon: usize) -> Vec<f64> {
        self.fit(window).roll_forward(window, horizon)
    }
}

/// One-shot centered ridge AR fit on a plain series (oldest first).
pub fn fit_window(series: &[f64], order: usize, ridge_lambda: f64) -> ArModel {
    let n = series.len();
    assert!(n > order, "series shorter than AR order");
    let mut sxx = vec![0.0; order * order];
    let mut sxy = vec![0.0; order];
    let mut sx = vec![0.0; order];
    let mut sy = 0.0;
    let mut sw = 0.0;
    for t in order..n {
        // lag j = series[t - 1 - j]
        for i in 0..order {
            let xi = series[t - 1 - i];
            for j in 0..order {
                sxx[i * order + j] += xi * series[t - 1 - j];
            }
            sxy[i] += xi * series[t];
            sx[i] += xi;
        }
        sy += series[t];
        sw += 1.0;
    }
    solve_centered_ridge(order, &sxx, &sxy, &sx, sy, sw, ridge_lambda)
}

fn solve_centered_ridge(
    order: usize,
    sxx: &[f64],
    sxy: &[f64],
    sx: &[f64],
    sy: f64,
    sw: f64,
    lambda: f64,
) -> ArModel {
    // Centered moments: Cxx = Sxx - Sx Sx^T / Sw, Cxy = Sxy - Sx Sy / Sw.
    let mut a = vec![0.0; order * order];
    let mut b = vec![0.0; order];
    for i in 0..order {
        for j in 0..order {
            a[i * order + j] = sxx[i * order + j] - sx[i] * sx[j] / sw;
        }
        a[i * order + i] += lambda;
        b[i] = sxy[i] - sx[i] * sy / sw;
    }
    let beta = solve_spd(&mut a, &mut b, order);
    let mut intercept = sy / sw;
    for j in 0..order {
        intercept -= beta[j] * sx[j] / sw;
    }
    ArModel { beta, intercept }
}

/// Cholesky solve of a (small) symmetric positive-definite system, in place.
fn solve_spd(a: &mut [f64], b: &mut [f64], n: usize) -> Vec<f64> {
    // A = L L^T
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                // lambda > 0 guarantees positive pivots; guard anyway.
                a[i * n + i] = libm::sqrt(sum.max(1e-12));
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i * n + k] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= a[k * n + i] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    b.to_vec()
}
