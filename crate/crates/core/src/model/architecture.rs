use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::math::{Matrix, MlpTape};

/// Layer sizes of the network. The first layer sees the `input_dim` features,
/// the scalar latent and a bias unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkArchitecture {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layer_sizes: Vec<usize>,
    #[serde(default = "one")]
    pub latent_dim: usize,
}

fn one() -> usize {
    1
}

impl NetworkArchitecture {
    pub fn new(input_dim: usize, hidden_layer_sizes: Vec<usize>, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            hidden_layer_sizes,
            latent_dim: 1,
        }
    }

    /// Two hidden layers of `units` each, the configuration used by all the
    /// shipped experiments.
    pub fn two_hidden(input_dim: usize, units: usize, output_dim: usize) -> Self {
        Self::new(input_dim, vec![units, units], output_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim != 1 {
            return Err(Error::Config(format!(
                "latent_dim must be 1, got {}",
                self.latent_dim
            )));
        }
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_layer_sizes.contains(&0) {
            return Err(Error::Config(format!("architecture has an empty layer: {self:?}")));
        }
        Ok(())
    }

    /// `(rows, cols)` of each weight matrix, bias column included.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut fan_in = self.input_dim + self.latent_dim;
        let mut shapes = Vec::with_capacity(self.hidden_layer_sizes.len() + 1);
        for &units in self.hidden_layer_sizes.iter().chain(std::iter::once(&self.output_dim)) {
            shapes.push((units, fan_in + 1));
            fan_in = units;
        }
        shapes
    }

    pub fn n_weights(&self) -> usize {
        self.layer_shapes().iter().map(|(r, c)| r * c).sum()
    }

    pub fn zero_layers(&self) -> Vec<Matrix> {
        self.layer_shapes()
            .into_iter()
            .map(|(r, c)| Matrix::zeros(r, c))
            .collect()
    }
}

/// One concrete draw of every weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSample {
    pub layers: Vec<Matrix>,
}

impl WeightSample {
    pub fn new(layers: Vec<Matrix>) -> Self {
        Self { layers }
    }

    pub fn conforms_to(&self, arch: &NetworkArchitecture) -> bool {
        let shapes = arch.layer_shapes();
        shapes.len() == self.layers.len()
            && shapes.iter().zip(&self.layers).all(|(s, m)| *s == m.shape())
    }
}

/// Reusable forward/backward workspace for one architecture.
#[derive(Debug, Clone)]
pub struct NetworkEvaluator {
    input: Vec<f64>,
    tape: MlpTape,
    input_grad: Vec<f64>,
}

impl NetworkEvaluator {
    pub fn new(arch: &NetworkArchitecture) -> Self {
        let layers = arch.zero_layers();
        Self {
            input: vec![0.0; arch.input_dim + 1],
            tape: MlpTape::for_layers(&layers),
            input_grad: vec![0.0; arch.input_dim + 1],
        }
    }

    /// `f(x, z; W)` without noise.
    #[inline]
    pub fn forward(&mut self, weights: &[Matrix], x: &[f64], z: f64) -> &[f64] {
        let d = self.input.len() - 1;
        self.input[..d].copy_from_slice(x);
        self.input[d] = z;
        self.tape.record(weights, &self.input)
    }

    pub fn output(&self) -> &[f64] {
        self.tape.output()
    }

    /// Backward pass of the last forward call. Returns `(d/dx, d/dz)` of
    /// `upstream . f` and optionally accumulates weight gradients.
    #[inline]
    pub fn backward(
        &mut self,
        weights: &[Matrix],
        upstream: &[f64],
        weight_grads: Option<&mut [Matrix]>,
    ) -> (&[f64], f64) {
        self.tape
            .backward(weights, upstream, &mut self.input_grad, weight_grads);
        let d = self.input_grad.len() - 1;
        (&self.input_grad[..d], self.input_grad[d])
    }
}

/// Deterministic network output `f(x, z; W)`.
pub fn forward(arch: &NetworkArchitecture, x: &[f64], z: f64, weights: &WeightSample) -> Result<Vec<f64>> {
    contract!(
        x.len() == arch.input_dim,
        "input has {} features, network expects {}",
        x.len(),
        arch.input_dim
    );
    contract!(
        weights.conforms_to(arch),
        "weight sample does not match architecture"
    );
    contract!(
        x.iter().all(|v| v.is_finite()) && z.is_finite(),
        "non-finite network input"
    );
    let mut eval = NetworkEvaluator::new(arch);
    Ok(eval.forward(&weights.layers, x, z).to_vec())
}
