use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Standardizer};
use crate::error::{contract, Result};
use crate::math::{log_mean_exp, RngStream};
use crate::model::{log_likelihood, GaussianLikelihood, VariationalPosterior};
use crate::uncertainty::predictive_grid;

/// Held-out metrics in original target units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Mean per-point predictive log density.
    pub log_likelihood: f64,
    /// Standard error of that mean over test points.
    pub log_likelihood_se: f64,
    /// Root mean squared error of the predictive mean over points and outputs.
    pub rmse: f64,
    pub per_point_log_likelihood: Vec<f64>,
}

/// `log((1/S) sum_s N(y | mean_s, diag(noise)))` for predictive means
/// `means[s]`, in the units of `y`.
pub fn mixture_log_likelihood(y: &[f64], means: &[&[f64]], noise_variances: &[f64]) -> Result<f64> {
    contract!(!means.is_empty(), "mixture needs at least one component");
    let terms = means
        .iter()
        .map(|m| log_likelihood(y, &GaussianLikelihood::new(m.to_vec(), noise_variances.to_vec())?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_mean_exp(&terms))
}

/// Predictive log-likelihood and RMSE on a standardized test set.
///
/// Each point uses an `N_w x N_z` grid drawn from `stream.substream(n)`; the
/// output noise is added in the density. Densities are mapped back to original
/// units by subtracting `sum_k ln(target_std_k)`, and the RMSE is scaled by the
/// target standard deviations.
pub fn evaluate(
    test_set: &Dataset,
    posterior: &VariationalPosterior,
    n_w: usize,
    n_z: usize,
    stream: &RngStream,
    scaler: &Standardizer,
) -> Result<Evaluation> {
    contract!(!test_set.is_empty(), "evaluation needs at least one test point");
    contract!(n_w * n_z >= 2, "evaluation needs N_w * N_z >= 2");
    let k = posterior.architecture.output_dim;
    contract!(
        scaler.target_stds.len() == k && test_set.n_targets() == k,
        "target dimension mismatch between model, data and standardization"
    );
    let noise = posterior.noise_variances();
    let log_jacobian: f64 = scaler.target_stds.iter().map(|s| s.ln()).sum();

    let per_point: Vec<(f64, f64)> = (0..test_set.len())
        .into_par_iter()
        .map(|n| {
            let grid = predictive_grid(test_set.x(n), posterior, n_w, n_z, &stream.substream(n as u64))?;
            let y = test_set.y(n);
            let samples: Vec<&[f64]> = grid.as_slice().chunks(k).collect();
            let ll = mixture_log_likelihood(y, &samples, &noise)? - log_jacobian;
            let inv = 1.0 / samples.len() as f64;
            let mut sq = 0.0;
            for (o, (yo, s)) in y.iter().zip(&scaler.target_stds).enumerate() {
                let mean: f64 = samples.iter().map(|m| m[o]).sum::<f64>() * inv;
                sq += ((mean - yo) * s).powi(2);
            }
            Ok((ll, sq))
        })
        .collect::<Result<_>>()?;

    let lls: Vec<f64> = per_point.iter().map(|p| p.0).collect();
    let (mean, se) = super::mean_and_se(&lls);
    let sq: f64 = per_point.iter().map(|p| p.1).sum();
    Ok(Evaluation {
        log_likelihood: mean,
        log_likelihood_se: se.unwrap_or(0.0),
        rmse: (sq / (lls.len() * k) as f64).sqrt(),
        per_point_log_likelihood: lls,
    })
}

/// Mean per-point predictive log-likelihood and its standard error.
pub fn test_log_likelihood(
    test_set: &Dataset,
    posterior: &VariationalPosterior,
    n_w: usize,
    n_z: usize,
    stream: &RngStream,
    scaler: &Standardizer,
) -> Result<(f64, f64)> {
    let e = evaluate(test_set, posterior, n_w, n_z, stream, scaler)?;
    Ok((e.log_likelihood, e.log_likelihood_se))
}
