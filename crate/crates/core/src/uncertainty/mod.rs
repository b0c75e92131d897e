//! Sampling-based split of the predictive variance into an epistemic part
//! (spread over weight draws of the latent-averaged output) and an aleatoric
//! part (average over weight draws of the spread over latent draws).
//!
//! Both parts use population (divide-by-N) variances, so
//! `epistemic^2 + aleatoric^2` equals the population variance of the whole
//! grid on every finite sample.

mod decompose;
mod grid;
mod model;

pub use decompose::{decompose, write_decompositions_csv, UncertaintyDecomposition, ZERO_VARIANCE};
pub use grid::{latent_draws, predictive_grid, weight_stream, PredictiveSampleGrid};
pub use model::LatentModel;

/// Mean of `values` computed as an offset from the first entry, which is exact
/// when every entry is equal.
#[inline]
pub(crate) fn shifted_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return f64::NAN;
    };
    let (mut acc, mut n) = (0.0, 1usize);
    for v in it {
        acc += v - first;
        n += 1;
    }
    first + acc / n as f64
}
