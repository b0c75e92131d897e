use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetworkArchitecture, VariationalPosterior};
use crate::data::Standardizer;
use crate::error::{contract, Error, Result};
use crate::math::Matrix;
use crate::FORMAT_VERSION;

/// On-disk form of a trained model. Weight arrays are the row-major layer
/// matrices concatenated in layer order. Training-point latents are not
/// stored: test-time prediction draws `z` from its prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format_version: u32,
    pub architecture: NetworkArchitecture,
    pub weight_means: Vec<f64>,
    pub weight_log_variances: Vec<f64>,
    pub latent_prior_variance: f64,
    pub output_noise_log_variances: Vec<f64>,
    pub standardization: Standardizer,
    #[serde(default)]
    pub feature_names: Vec<String>,
    #[serde(default)]
    pub target_names: Vec<String>,
}

impl SavedModel {
    pub fn from_posterior(
        posterior: &VariationalPosterior,
        standardization: Standardizer,
        feature_names: Vec<String>,
        target_names: Vec<String>,
    ) -> Self {
        let flat = |ms: &[Matrix]| ms.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
        Self {
            format_version: FORMAT_VERSION,
            architecture: posterior.architecture.clone(),
            weight_means: flat(&posterior.weight_means),
            weight_log_variances: flat(&posterior.weight_log_variances),
            latent_prior_variance: posterior.latent_prior_variance,
            output_noise_log_variances: posterior.output_noise_log_variances.clone(),
            standardization,
            feature_names,
            target_names,
        }
    }

    /// Rebuilds a posterior with no training latents.
    pub fn posterior(&self) -> Result<VariationalPosterior> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format_version {}",
                self.format_version
            )));
        }
        self.architecture.validate()?;
        let n = self.architecture.n_weights();
        contract!(
            self.weight_means.len() == n && self.weight_log_variances.len() == n,
            "model file has {} / {} weights, architecture needs {n}",
            self.weight_means.len(),
            self.weight_log_variances.len()
        );
        let unflatten = |flat: &[f64]| -> Result<Vec<Matrix>> {
            let mut offset = 0;
            self.architecture
                .layer_shapes()
                .into_iter()
                .map(|(r, c)| {
                    let m = Matrix::from_vec(r, c, flat[offset..offset + r * c].to_vec());
                    offset += r * c;
                    m
                })
                .collect()
        };
        let post = VariationalPosterior {
            architecture: self.architecture.clone(),
            weight_means: unflatten(&self.weight_means)?,
            weight_log_variances: unflatten(&self.weight_log_variances)?,
            latent_means: Vec::new(),
            latent_log_variances: Vec::new(),
            latent_prior_variance: self.latent_prior_variance,
            output_noise_log_variances: self.output_noise_log_variances.clone(),
        };
        post.validate()?;
        let d = self.architecture.input_dim;
        let k = self.architecture.output_dim;
        contract!(
            self.standardization.feature_means.len() == d
                && self.standardization.feature_stds.len() == d
                && self.standardization.target_means.len() == k
                && self.standardization.target_stds.len() == k,
            "standardization does not match the architecture"
        );
        Ok(post)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: Self = serde_json::from_str(&text)?;
        model.posterior()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::RngStream;

    #[test]
    fn json_round_trip_preserves_posterior() {
        let arch = NetworkArchitecture::two_hidden(3, 4, 2);
        let p = VariationalPosterior::initialize(arch, 5, 1.0, &mut RngStream::new(1, 2)).unwrap();
        let saved = SavedModel::from_posterior(
            &p,
            Standardizer::identity(3, 2),
            vec!["a".into(), "b".into(), "c".into()],
            vec!["y1".into(), "y2".into()],
        );
        let text = saved.to_json().unwrap();
        let back: SavedModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, saved);
        assert_eq!(back.posterior().unwrap(), p.without_latents());
        for key in [
            "format_version",
            "architecture",
            "weight_means",
            "weight_log_variances",
            "latent_prior_variance",
            "output_noise_log_variances",
            "standardization",
            "feature_stds",
        ] {
            assert!(text.contains(key), "missing {key}");
        }
        assert!(!text.contains("latent_means"));
    }

    #[test]
    fn truncated_weights_rejected() {
        let arch = NetworkArchitecture::two_hidden(1, 2, 1);
        let p = VariationalPosterior::initialize(arch, 0, 1.0, &mut RngStream::new(1, 2)).unwrap();
        let mut saved = SavedModel::from_posterior(&p, Standardizer::identity(1, 1), vec![], vec![]);
        saved.weight_means.pop();
        assert!(saved.posterior().is_err());
    }
}
