use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training hyper-parameters. The JSON form uses these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alpha: f64,
    pub mc_samples: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Variance `gamma` of the latent prior.
    pub latent_prior_variance: f64,
    /// Global gradient-norm clip applied before each Adam step.
    pub grad_clip: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            mc_samples: 10,
            epochs: 3000,
            learning_rate: 0.001,
            batch_size: 128,
            seed: 0,
            latent_prior_variance: 1.0,
            grad_clip: 100.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Config(format!("field '{field}': {why}")));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("must lie in (0, 1], got {}", self.alpha));
        }
        if self.mc_samples == 0 {
            return bad("mc_samples", "must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", format!("must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be at least 1".into());
        }
        if !(self.latent_prior_variance > 0.0 && self.latent_prior_variance.is_finite()) {
            return bad(
                "latent_prior_variance",
                format!("must be positive, got {}", self.latent_prior_variance),
            );
        }
        if !(self.grad_clip > 0.0) {
            return bad("grad_clip", format!("must be positive, got {}", self.grad_clip));
        }
        Ok(())
    }

    /// Parses a JSON object field by field so that errors name the field.
    /// Missing fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(map) = value else {
            return Err(Error::Config("training config must be a JSON object".into()));
        };
        let mut config = Self::default();
        for (key, v) in map {
            let field_err = |e: serde_json::Error| Error::Config(format!("field '{key}': {e}"));
            match key.as_str() {
                "alpha" => config.alpha = serde_json::from_value(v).map_err(field_err)?,
                "mc_samples" => config.mc_samples = serde_json::from_value(v).map_err(field_err)?,
                "epochs" => config.epochs = serde_json::from_value(v).map_err(field_err)?,
                "learning_rate" => config.learning_rate = serde_json::from_value(v).map_err(field_err)?,
                "batch_size" => config.batch_size = serde_json::from_value(v).map_err(field_err)?,
                "seed" => config.seed = serde_json::from_value(v).map_err(field_err)?,
                "latent_prior_variance" => {
                    config.latent_prior_variance = serde_json::from_value(v).map_err(field_err)?
                }
                "grad_clip" => config.grad_clip = serde_json::from_value(v).map_err(field_err)?,
                other => return Err(Error::Config(format!("field '{other}': unknown training config field"))),
            }
        }
        config.validate()?;
        Ok(config)
    }
}
