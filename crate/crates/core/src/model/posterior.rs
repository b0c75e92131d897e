use crate::error::{contract, Error, Result};
use crate::math::{gaussian_draw, Matrix, RngStream};

use super::{NetworkArchitecture, WeightSample};

/// Log-variance whose variance and standard deviation (`exp(lv / 2)`) both
/// underflow to exactly zero. Marks a weight as deterministic while keeping
/// every stored number finite.
pub const DEGENERATE_LOG_VARIANCE: f64 = -1500.0;

const INIT_WEIGHT_LOG_VARIANCE: f64 = -9.210_340_371_976_184; // ln(1e-4)
const INIT_NOISE_LOG_VARIANCE: f64 = -4.605_170_185_988_091; // ln(0.1^2)

/// Mean-field Gaussian posterior over all weights and the per-training-point
/// latents. Variances are stored as log-variances.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalPosterior {
    pub architecture: NetworkArchitecture,
    pub weight_means: Vec<Matrix>,
    pub weight_log_variances: Vec<Matrix>,
    pub latent_means: Vec<f64>,
    pub latent_log_variances: Vec<f64>,
    pub latent_prior_variance: f64,
    pub output_noise_log_variances: Vec<f64>,
}

impl VariationalPosterior {
    /// Weight means ~ N(0, 1/fan_in), weight variances 1e-4, latents at their
    /// prior, output noise variance 0.01 (standardized targets).
    pub fn initialize(
        architecture: NetworkArchitecture,
        n_train: usize,
        latent_prior_variance: f64,
        stream: &mut RngStream,
    ) -> Result<Self> {
        architecture.validate()?;
        if !(latent_prior_variance > 0.0 && latent_prior_variance.is_finite()) {
            return Err(Error::Domain(format!(
                "latent prior variance must be positive, got {latent_prior_variance}"
            )));
        }
        let mut weight_means = architecture.zero_layers();
        for m in &mut weight_means {
            let fan_in = (m.cols() - 1) as f64;
            for v in m.as_mut_slice() {
                *v = gaussian_draw(stream, 0.0, 1.0 / fan_in)?;
            }
        }
        let weight_log_variances = weight_means
            .iter()
            .map(|m| Matrix::filled(m.rows(), m.cols(), INIT_WEIGHT_LOG_VARIANCE))
            .collect();
        Ok(Self {
            output_noise_log_variances: vec![INIT_NOISE_LOG_VARIANCE; architecture.output_dim],
            architecture,
            weight_means,
            weight_log_variances,
            latent_means: vec![0.0; n_train],
            latent_log_variances: vec![latent_prior_variance.ln(); n_train],
            latent_prior_variance,
        })
    }

    /// A posterior whose weights are fixed at `weights` (zero variance).
    pub fn point_mass(
        architecture: NetworkArchitecture,
        weights: WeightSample,
        latent_prior_variance: f64,
        output_noise_variances: &[f64],
    ) -> Result<Self> {
        contract!(
            weights.conforms_to(&architecture),
            "weights do not match the architecture"
        );
        let weight_log_variances = weights
            .layers
            .iter()
            .map(|m| Matrix::filled(m.rows(), m.cols(), DEGENERATE_LOG_VARIANCE))
            .collect();
        let post = Self {
            output_noise_log_variances: output_noise_variances.iter().map(|v| v.ln()).collect(),
            architecture,
            weight_means: weights.layers,
            weight_log_variances,
            latent_means: Vec::new(),
            latent_log_variances: Vec::new(),
            latent_prior_variance,
        };
        post.validate()?;
        Ok(post)
    }

    pub fn validate(&self) -> Result<()> {
        self.architecture.validate()?;
        let shapes = self.architecture.layer_shapes();
        let ok = |ms: &[Matrix]| ms.len() == shapes.len() && ms.iter().zip(&shapes).all(|(m, s)| m.shape() == *s);
        contract!(ok(&self.weight_means), "weight means do not match architecture");
        contract!(ok(&self.weight_log_variances), "weight variances do not match architecture");
        contract!(
            self.latent_means.len() == self.latent_log_variances.len(),
            "latent means and variances differ in length"
        );
        contract!(
            self.output_noise_log_variances.len() == self.architecture.output_dim,
            "need one output noise variance per output"
        );
        if !(self.latent_prior_variance > 0.0 && self.latent_prior_variance.is_finite()) {
            return Err(Error::Domain(format!(
                "latent prior variance must be positive, got {}",
                self.latent_prior_variance
            )));
        }
        if let Some(name) = self.first_non_finite() {
            return Err(Error::NonFinite(name));
        }
        Ok(())
    }

    /// Name of the first non-finite parameter, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        let layer_check = |label: &str, ms: &[Matrix]| {
            ms.iter().enumerate().find_map(|(l, m)| {
                m.as_slice()
                    .iter()
                    .position(|v| !v.is_finite())
                    .map(|i| format!("{label}[layer {l}][{}, {}]", i / m.cols(), i % m.cols()))
            })
        };
        let vec_check = |label: &str, vs: &[f64]| {
            vs.iter()
                .position(|v| !v.is_finite())
                .map(|i| format!("{label}[{i}]"))
        };
        layer_check("weight_means", &self.weight_means)
            .or_else(|| layer_check("weight_log_variances", &self.weight_log_variances))
            .or_else(|| vec_check("output_noise_log_variances", &self.output_noise_log_variances))
            .or_else(|| vec_check("latent_means", &self.latent_means))
            .or_else(|| vec_check("latent_log_variances", &self.latent_log_variances))
    }

    pub fn n_train(&self) -> usize {
        self.latent_means.len()
    }

    pub fn n_weights(&self) -> usize {
        self.weight_means.iter().map(|m| m.as_slice().len()).sum()
    }

    pub fn noise_variances(&self) -> Vec<f64> {
        self.output_noise_log_variances.iter().map(|v| v.exp()).collect()
    }

    pub fn mean_weights(&self) -> WeightSample {
        WeightSample::new(self.weight_means.clone())
    }

    /// Each weight drawn independently from `N(m, v)`.
    pub fn sample_weights(&self, stream: &mut RngStream) -> WeightSample {
        let mut layers = self.architecture.zero_layers();
        self.sample_weights_into(stream, &mut layers);
        WeightSample::new(layers)
    }

    pub fn sample_weights_into(&self, stream: &mut RngStream, out: &mut [Matrix]) {
        for ((o, m), lv) in out
            .iter_mut()
            .zip(&self.weight_means)
            .zip(&self.weight_log_variances)
        {
            for ((o, m), lv) in o.as_mut_slice().iter_mut().zip(m.as_slice()).zip(lv.as_slice()) {
                *o = m + (0.5 * lv).exp() * stream.standard_normal();
            }
        }
    }

    /// Sets every weight variance to zero.
    pub fn with_deterministic_weights(mut self) -> Self {
        for m in &mut self.weight_log_variances {
            m.as_mut_slice().fill(DEGENERATE_LOG_VARIANCE);
        }
        self
    }

    /// Drops training-point latents; test-time prediction only uses the prior.
    pub fn without_latents(mut self) -> Self {
        self.latent_means.clear();
        self.latent_log_variances.clear();
        self
    }

    /// Number of trainable scalars, in [`Self::to_flat`] order.
    pub fn n_params(&self) -> usize {
        2 * self.n_weights() + self.architecture.output_dim + 2 * self.n_train()
    }

    /// Flattened parameters: weight means, weight log-variances, output noise
    /// log-variances, latent means, latent log-variances.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for m in &self.weight_means {
            out.extend_from_slice(m.as_slice());
        }
        for m in &self.weight_log_variances {
            out.extend_from_slice(m.as_slice());
        }
        out.extend_from_slice(&self.output_noise_log_variances);
        out.extend_from_slice(&self.latent_means);
        out.extend_from_slice(&self.latent_log_variances);
        out
    }

    pub fn set_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        contract!(
            flat.len() == self.n_params(),
            "flat parameter vector has {} entries, expected {}",
            flat.len(),
            self.n_params()
        );
        let mut rest = flat;
        let mut take = |n: usize| {
            let (a, b) = rest.split_at(n);
            rest = b;
            a
        };
        for m in &mut self.weight_means {
            let n = m.as_slice().len();
            m.as_mut_slice().copy_from_slice(take(n));
        }
        for m in &mut self.weight_log_variances {
            let n = m.as_slice().len();
            m.as_mut_slice().copy_from_slice(take(n));
        }
        let k = self.output_noise_log_variances.len();
        self.output_noise_log_variances.copy_from_slice(take(k));
        let n = self.latent_means.len();
        self.latent_means.copy_from_slice(take(n));
        self.latent_log_variances.copy_from_slice(take(n));
        Ok(())
    }
}

/// A draw from the latent prior `N(0, gamma)`.
pub fn sample_latent_prior(gamma: f64, stream: &mut RngStream) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!(
            "latent prior variance must be positive, got {gamma}"
        )));
    }
    gaussian_draw(stream, 0.0, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn posterior() -> VariationalPosterior {
        let arch = NetworkArchitecture::two_hidden(2, 5, 1);
        VariationalPosterior::initialize(arch, 7, 1.0, &mut RngStream::new(0, 0)).unwrap()
    }

    #[test]
    fn degenerate_variance_samples_the_mean() {
        let p = posterior().with_deterministic_weights();
        let w = p.sample_weights(&mut RngStream::new(1, 1));
        assert_eq!(w.layers, p.weight_means);
    }

    #[test]
    fn distinct_streams_give_distinct_draws() {
        let p = posterior();
        let a = p.sample_weights(&mut RngStream::new(1, 1));
        let b = p.sample_weights(&mut RngStream::new(1, 2));
        assert_ne!(a, b);
    }

    #[test]
    fn weight_draw_moments() {
        let mut p = posterior();
        p.weight_means[1].set(2, 3, 0.75);
        p.weight_log_variances[1].set(2, 3, 0.3_f64.ln());
        let n = 100_000;
        let mut stream = RngStream::new(42, 0);
        let mut layers = p.architecture.zero_layers();
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                p.sample_weights_into(&mut stream, &mut layers);
                layers[1].get(2, 3)
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        let se_mean = (0.3 / n as f64).sqrt();
        let se_var = 0.3 * (2.0 / n as f64).sqrt();
        assert!((mean - 0.75).abs() < 3.0 * se_mean, "mean {mean}");
        assert!((var - 0.3).abs() < 3.0 * se_var, "var {var}");
    }

    #[test]
    fn latent_prior_draws() {
        assert!(matches!(
            sample_latent_prior(0.0, &mut RngStream::new(0, 0)),
            Err(Error::Domain(_))
        ));
        let a = sample_latent_prior(1.0, &mut RngStream::new(3, 9)).unwrap();
        let b = sample_latent_prior(1.0, &mut RngStream::new(3, 9)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(gaussian_draw(&mut RngStream::new(3, 9), 0.0, 0.0).unwrap(), 0.0);

        let mut s = RngStream::new(5, 5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_latent_prior(1.0, &mut s).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn flat_round_trip_and_initial_values() {
        let p = posterior();
        assert_eq!(p.latent_log_variances, vec![0.0; 7]);
        assert!((p.noise_variances()[0] - 0.01).abs() < 1e-15);
        let flat = p.to_flat();
        assert_eq!(flat.len(), p.n_params());
        let mut q = p.clone();
        q.set_from_flat(&flat).unwrap();
        assert_eq!(p, q);
        assert!(q.set_from_flat(&flat[1..]).is_err());
    }

    #[test]
    fn non_finite_parameter_is_named() {
        let mut p = posterior();
        p.weight_log_variances[2].set(0, 4, f64::NAN);
        assert_eq!(
            p.first_non_finite().as_deref(),
            Some("weight_log_variances[layer 2][0, 4]")
        );
        assert!(p.validate().is_err());
    }
}
