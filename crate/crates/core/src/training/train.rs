use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::energy::latent_kl_grad;
use super::{energy_and_gradient, Example, TrainConfig};
use crate::data::Dataset;
use crate::error::{contract, Error, Result};
use crate::math::{AdamState, RngStream};
use crate::model::{NetworkArchitecture, VariationalPosterior};

const INIT_STREAM: u64 = 0x494e_4954;
const SHUFFLE_STREAM: u64 = 0x5348_5546;
const ENERGY_STREAM: u64 = 0x454e_4552;

/// Epoch-averaged energy terms; one line of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub energy: f64,
    pub kl_weight_term: f64,
    pub kl_latent_term: f64,
    pub likelihood_term: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub posterior: VariationalPosterior,
    pub trace: Vec<EpochRecord>,
}

/// Fits the posterior on a standardized dataset with mini-batch Adam.
///
/// Each step uses the energy gradient for weights and output noise. Latent
/// parameters are updated only for the points in the batch, with their KL
/// gradient scaled by `N / B` so an epoch applies the full KL pull once.
pub fn train(dataset: &Dataset, arch: &NetworkArchitecture, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    arch.validate()?;
    contract!(!dataset.is_empty(), "cannot train on an empty dataset");
    contract!(
        dataset.n_features() == arch.input_dim && dataset.n_targets() == arch.output_dim,
        "dataset is {} -> {}, architecture is {} -> {}",
        dataset.n_features(),
        dataset.n_targets(),
        arch.input_dim,
        arch.output_dim
    );
    let n = dataset.len();
    let mut posterior = VariationalPosterior::initialize(
        arch.clone(),
        n,
        config.latent_prior_variance,
        &mut RngStream::new(config.seed, INIT_STREAM),
    )?;

    let n_params = posterior.n_params();
    let p = posterior.n_weights();
    let k_out = arch.output_dim;
    let lat_m_off = 2 * p + k_out;
    let lat_v_off = lat_m_off + n;
    let mut adam = AdamState::new(n_params, config.learning_rate);
    let mut params = posterior.to_flat();
    let mut order: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = Vec::with_capacity(2 * p + k_out + 2 * config.batch_size);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut step: u64 = 0;

    for epoch in 0..config.epochs {
        let mut shuffle = RngStream::new(config.seed, SHUFFLE_STREAM).substream(epoch as u64);
        for i in (1..n).rev() {
            let j = ((shuffle.uniform() * (i + 1) as f64) as usize).min(i);
            order.swap(i, j);
        }

        let mut sums = [0.0f64; 4];
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Example<'_>> = chunk
                .iter()
                .map(|&i| Example {
                    x: dataset.x(i),
                    y: dataset.y(i),
                    index: i,
                })
                .collect();
            let stream = RngStream::new(config.seed, ENERGY_STREAM).substream(step);
            let (value, mut grad) = energy_and_gradient(&batch, &posterior, config, &stream)?;
            if !value.total.is_finite() {
                return Err(non_finite(&posterior, epoch, "energy"));
            }

            active.clear();
            active.extend(0..lat_m_off);
            let kl_scale = n as f64 / batch.len() as f64 - 1.0;
            for ex in &batch {
                let (dm, dlv) = latent_kl_grad(&posterior, ex.index);
                grad[lat_m_off + ex.index] += kl_scale * dm;
                grad[lat_v_off + ex.index] += kl_scale * dlv;
                active.push(lat_m_off + ex.index);
                active.push(lat_v_off + ex.index);
            }
            let norm = active.iter().map(|&i| grad[i] * grad[i]).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(non_finite(&posterior, epoch, "gradient"));
            }
            if norm > config.grad_clip {
                let c = config.grad_clip / norm;
                active.iter().for_each(|&i| grad[i] *= c);
            }
            adam.step_sparse(&mut params, &grad, &active)?;
            posterior.set_from_flat(&params)?;
            if let Some(name) = posterior.first_non_finite() {
                return Err(Error::NonFinite(format!("epoch {epoch}: parameter {name}")));
            }

            sums[0] += value.total;
            sums[1] += value.kl_weight_term;
            sums[2] += value.kl_latent_term;
            sums[3] += value.likelihood_term;
            batches += 1;
            step += 1;
        }
        let b = batches as f64;
        trace.push(EpochRecord {
            epoch,
            energy: sums[0] / b,
            kl_weight_term: sums[1] / b,
            kl_latent_term: sums[2] / b,
            likelihood_term: sums[3] / b,
        });
    }
    Ok(TrainOutcome { posterior, trace })
}

fn non_finite(posterior: &VariationalPosterior, epoch: usize, what: &str) -> Error {
    let first = posterior
        .first_non_finite()
        .unwrap_or_else(|| "none (all parameters finite before the step)".into());
    Error::NonFinite(format!(
        "epoch {epoch}: non-finite {what}; first non-finite parameter: {first}"
    ))
}

/// Newline-delimited JSON, one [`EpochRecord`] per line.
pub fn write_training_log(path: impl AsRef<Path>, trace: &[EpochRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for rec in trace {
        serde_json::to_writer(&mut f, rec)?;
        writeln!(f).map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}
