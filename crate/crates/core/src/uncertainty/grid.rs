use super::LatentModel;
use crate::error::{contract, Result};
use crate::math::RngStream;
use crate::model::sample_latent_prior;

const WEIGHT_TAG: u64 = 1;
const LATENT_TAG: u64 = 2;

/// `N_w x N_z x K` forward-pass outputs for one input. Row `n_w` shares one
/// weight draw across all of its `N_z` latent draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSampleGrid {
    n_w: usize,
    n_z: usize,
    k: usize,
    samples: Vec<f64>,
}

impl PredictiveSampleGrid {
    pub fn from_vec(n_w: usize, n_z: usize, k: usize, samples: Vec<f64>) -> Result<Self> {
        contract!(
            samples.len() == n_w * n_z * k && n_w >= 1 && n_z >= 1 && k >= 1,
            "grid of {} samples does not match {n_w} x {n_z} x {k}",
            samples.len()
        );
        contract!(samples.iter().all(|v| v.is_finite()), "grid contains non-finite samples");
        Ok(Self { n_w, n_z, k, samples })
    }

    /// Builds a single-output grid from nested `[n_w][n_z]` rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_z = rows.first().map_or(0, Vec::len);
        contract!(rows.iter().all(|r| r.len() == n_z), "ragged grid rows");
        Self::from_vec(rows.len(), n_z, 1, rows.concat())
    }

    pub fn n_w(&self) -> usize {
        self.n_w
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_outputs(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, w: usize, z: usize, k: usize) -> f64 {
        self.samples[(w * self.n_z + z) * self.k + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.samples
    }
}

/// Stream for the `n_w`-th weight draw of a point keyed by `point`.
pub fn weight_stream(point: &RngStream, n_w: usize) -> RngStream {
    point.substream(WEIGHT_TAG).substream(n_w as u64)
}

/// The `N_z` latent draws from `N(0, gamma)` for a point. The same draws are
/// reused under every weight draw.
pub fn latent_draws(point: &RngStream, gamma: f64, n_z: usize) -> Result<Vec<f64>> {
    let mut s = point.substream(LATENT_TAG);
    (0..n_z).map(|_| sample_latent_prior(gamma, &mut s)).collect()
}

/// Runs `N_w x N_z` noise-free forward passes at `x`.
pub fn predictive_grid<M: LatentModel>(
    x: &[f64],
    model: &M,
    n_w: usize,
    n_z: usize,
    stream: &RngStream,
) -> Result<PredictiveSampleGrid> {
    contract!(n_w >= 1 && n_z >= 1, "grid needs N_w >= 1 and N_z >= 1");
    contract!(
        x.len() == model.input_dim(),
        "input has {} features, model expects {}",
        x.len(),
        model.input_dim()
    );
    let k = model.output_dim();
    let zs = latent_draws(stream, model.latent_prior_variance(), n_z)?;
    let mut ws = model.workspace();
    let mut samples = vec![0.0; n_w * n_z * k];
    for (j, block) in samples.chunks_mut(n_z * k).enumerate() {
        let w = model.draw_weights(&mut weight_stream(stream, j));
        for (z, out) in zs.iter().zip(block.chunks_mut(k)) {
            model.predict(&mut ws, &w, x, *z, out);
        }
    }
    PredictiveSampleGrid::from_vec(n_w, n_z, k, samples)
}
