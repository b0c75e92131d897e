//! Numerical foundations: dense matrices, counter-based random streams, the
//! Adam optimizer and reverse-mode derivatives of the network forward pass.

mod adam;
mod matrix;
mod rng;
pub mod tape;

pub use adam::AdamState;
pub use matrix::Matrix;
pub use rng::{gaussian_draw, RngStream};
pub use tape::{relu, MlpTape};

/// Numerically stable `log((1/n) * sum(exp(v)))`.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + (sum / values.len() as f64).ln()
}

/// Softmax weights of `values`, the derivative of [`log_mean_exp`] with respect
/// to each entry.
pub fn softmax_into(values: &[f64], out: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, v) in out.iter_mut().zip(values) {
        *o = (v - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}
