//! The training objective
//!
//! ```text
//! E = KL(q(W) || p(W)) + sum_n KL(q(z_n) || N(0, gamma))
//!     - (1/alpha) * sum_{n in batch} (N/B) * log( (1/S) sum_s exp(alpha * log p(y_n | f(x_n, z_ns; W_s), Sigma)) )
//! ```
//!
//! with `p(W)` a standard normal per weight and `W_s = m + sqrt(v) u`,
//! `z_ns = m_n + sqrt(v_n) u` reparameterized so that `E` is differentiable in
//! every variational parameter. The noise `u` comes from the supplied stream,
//! so repeated calls with the same stream evaluate the same function.

use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{contract, Error, Result};
use crate::math::{log_mean_exp, softmax_into, Matrix, RngStream};
use crate::model::{NetworkEvaluator, VariationalPosterior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub total: f64,
    pub kl_weight_term: f64,
    pub kl_latent_term: f64,
    pub likelihood_term: f64,
}

/// One training pair and the index of its latent parameters.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub index: usize,
}

/// `KL(N(m1, v1) || N(m2, v2))`.
pub fn kl_gaussian(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::Domain(format!(
            "KL needs positive variances, got {v1} and {v2}"
        )));
    }
    Ok(0.5 * (v1 / v2 + (m1 - m2).powi(2) / v2 - 1.0 + (v2 / v1).ln()))
}

/// KL of `N(m, exp(lv))` from `N(0, prior_var)` with its derivatives in `m` and `lv`.
#[inline]
fn kl_to_centered(m: f64, lv: f64, prior_var: f64) -> (f64, f64, f64) {
    let v = lv.exp();
    let value = 0.5 * (v / prior_var + m * m / prior_var - 1.0 - lv + prior_var.ln());
    (value, m / prior_var, 0.5 * (v / prior_var - 1.0))
}

/// Value of the energy on `batch` with the draws given by `stream`.
pub fn energy(
    batch: &[Example<'_>],
    posterior: &VariationalPosterior,
    config: &TrainConfig,
    stream: &RngStream,
) -> Result<EnergyValue> {
    evaluate(batch, posterior, config, stream, false).map(|(v, _)| v)
}

/// Energy value and its exact gradient in [`VariationalPosterior::to_flat`]
/// order, for the frozen draws given by `stream`.
pub fn energy_and_gradient(
    batch: &[Example<'_>],
    posterior: &VariationalPosterior,
    config: &TrainConfig,
    stream: &RngStream,
) -> Result<(EnergyValue, Vec<f64>)> {
    evaluate(batch, posterior, config, stream, true)
}

fn evaluate(
    batch: &[Example<'_>],
    posterior: &VariationalPosterior,
    config: &TrainConfig,
    stream: &RngStream,
    want_grad: bool,
) -> Result<(EnergyValue, Vec<f64>)> {
    contract!(!batch.is_empty(), "energy needs a non-empty batch");
    let arch = &posterior.architecture;
    let n_train = posterior.n_train();
    for ex in batch {
        contract!(
            ex.index < n_train,
            "batch index {} out of range for {n_train} latents",
            ex.index
        );
        contract!(
            ex.x.len() == arch.input_dim && ex.y.len() == arch.output_dim,
            "example shape does not match the architecture"
        );
    }
    let alpha = config.alpha;
    let s_count = config.mc_samples;
    let gamma = posterior.latent_prior_variance;
    let scale = n_train as f64 / batch.len() as f64;
    let k_out = arch.output_dim;
    let noise_var: Vec<f64> = posterior.output_noise_log_variances.iter().map(|v| v.exp()).collect();
    let p = posterior.n_weights();

    // Reparameterized draws.
    let mut weight_noise: Vec<Vec<f64>> = Vec::with_capacity(s_count);
    let mut weights: Vec<Vec<Matrix>> = Vec::with_capacity(s_count);
    let mut latent_noise = vec![0.0; s_count * batch.len()];
    for s in 0..s_count {
        let mut sub = stream.substream(s as u64);
        let mut u = vec![0.0; p];
        sub.fill_standard_normal(&mut u);
        sub.fill_standard_normal(&mut latent_noise[s * batch.len()..(s + 1) * batch.len()]);
        let mut layers = arch.zero_layers();
        let mut off = 0;
        for ((w, m), lv) in layers
            .iter_mut()
            .zip(&posterior.weight_means)
            .zip(&posterior.weight_log_variances)
        {
            for ((w, m), lv) in w.as_mut_slice().iter_mut().zip(m.as_slice()).zip(lv.as_slice()) {
                *w = m + (0.5 * lv).exp() * u[off];
                off += 1;
            }
        }
        weight_noise.push(u);
        weights.push(layers);
    }

    let mut grad = if want_grad { vec![0.0; posterior.n_params()] } else { Vec::new() };
    let mut weight_grads: Vec<Vec<Matrix>> = if want_grad {
        (0..s_count).map(|_| arch.zero_layers()).collect()
    } else {
        Vec::new()
    };
    let noise_off = 2 * p;
    let lat_m_off = noise_off + k_out;
    let lat_v_off = lat_m_off + n_train;

    let mut evals: Vec<NetworkEvaluator> = (0..s_count).map(|_| NetworkEvaluator::new(arch)).collect();
    let mut lls = vec![0.0; s_count];
    let mut tempered = vec![0.0; s_count];
    let mut resp = vec![0.0; s_count];
    let mut upstream = vec![0.0; k_out];
    let mut zs = vec![0.0; s_count];
    let mut likelihood_term = 0.0;

    for (b, ex) in batch.iter().enumerate() {
        let z_std = (0.5 * posterior.latent_log_variances[ex.index]).exp();
        let z_mean = posterior.latent_means[ex.index];
        for s in 0..s_count {
            let z = z_mean + z_std * latent_noise[s * batch.len() + b];
            zs[s] = z;
            let f = evals[s].forward(&weights[s], ex.x, z);
            let mut ll = 0.0;
            for k in 0..k_out {
                let r = ex.y[k] - f[k];
                ll += -0.5 * (std::f64::consts::TAU * noise_var[k]).ln() - 0.5 * r * r / noise_var[k];
            }
            lls[s] = ll;
            tempered[s] = alpha * ll;
        }
        likelihood_term -= scale / alpha * log_mean_exp(&tempered);

        if !want_grad {
            continue;
        }
        softmax_into(&tempered, &mut resp);
        for s in 0..s_count {
            // d(term)/d(ll_s) = -scale * resp_s
            let c = -scale * resp[s];
            let f = evals[s].output();
            for k in 0..k_out {
                let r = ex.y[k] - f[k];
                upstream[k] = c * r / noise_var[k];
                grad[noise_off + k] += c * (-0.5 + 0.5 * r * r / noise_var[k]);
            }
            let (_, dz) = evals[s].backward(&weights[s], &upstream, Some(&mut weight_grads[s]));
            grad[lat_m_off + ex.index] += dz;
            grad[lat_v_off + ex.index] += dz * 0.5 * z_std * latent_noise[s * batch.len() + b];
        }
    }

    if want_grad {
        for (s, layer_grads) in weight_grads.iter().enumerate() {
            let mut off = 0;
            for (g, lv) in layer_grads.iter().zip(&posterior.weight_log_variances) {
                for (g, lv) in g.as_slice().iter().zip(lv.as_slice()) {
                    grad[off] += g;
                    grad[p + off] += g * 0.5 * (0.5 * lv).exp() * weight_noise[s][off];
                    off += 1;
                }
            }
        }
    }

    let mut kl_weight_term = 0.0;
    let mut off = 0;
    for (m, lv) in posterior.weight_means.iter().zip(&posterior.weight_log_variances) {
        for (m, lv) in m.as_slice().iter().zip(lv.as_slice()) {
            let (v, dm, dlv) = kl_to_centered(*m, *lv, 1.0);
            kl_weight_term += v;
            if want_grad {
                grad[off] += dm;
                grad[p + off] += dlv;
            }
            off += 1;
        }
    }
    let mut kl_latent_term = 0.0;
    for n in 0..n_train {
        let (v, dm, dlv) = kl_to_centered(posterior.latent_means[n], posterior.latent_log_variances[n], gamma);
        kl_latent_term += v;
        if want_grad {
            grad[lat_m_off + n] += dm;
            grad[lat_v_off + n] += dlv;
        }
    }

    let value = EnergyValue {
        total: kl_weight_term + kl_latent_term + likelihood_term,
        kl_weight_term,
        kl_latent_term,
        likelihood_term,
    };
    Ok((value, grad))
}

/// Derivatives of one latent's KL term, used by the sparse training update.
pub(crate) fn latent_kl_grad(posterior: &VariationalPosterior, n: usize) -> (f64, f64) {
    let (_, dm, dlv) = kl_to_centered(
        posterior.latent_means[n],
        posterior.latent_log_variances[n],
        posterior.latent_prior_variance,
    );
    (dm, dlv)
}
