//! Reverse-mode derivatives for the feed-forward network used throughout the
//! crate. A [`MlpTape`] records one forward pass (layer inputs and
//! pre-activations) and replays it backwards for any upstream gradient.
//!
//! Hidden layers use `max(v, 0)` with derivative 0 at exactly 0; the output
//! layer is the identity. Each layer matrix has one trailing bias column.

use super::Matrix;
use crate::error::{contract, Result};

#[inline]
pub fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Recorded forward pass with scratch space for the backward sweep. Buffers
/// are reused across calls to [`MlpTape::record`].
#[derive(Debug, Clone)]
pub struct MlpTape {
    /// `inputs[l]` feeds layer `l`; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl MlpTape {
    /// Allocates buffers for the given layer stack.
    pub fn for_layers(layers: &[Matrix]) -> Self {
        let inputs = layers.iter().map(|w| vec![0.0; w.cols() - 1]).collect();
        let pre: Vec<Vec<f64>> = layers.iter().map(|w| vec![0.0; w.rows()]).collect();
        Self {
            inputs,
            delta: pre.clone(),
            pre,
        }
    }

    /// Runs the forward pass and returns the network output.
    pub fn record(&mut self, layers: &[Matrix], input: &[f64]) -> &[f64] {
        debug_assert_eq!(layers.len(), self.pre.len());
        self.inputs[0].copy_from_slice(input);
        let last = layers.len() - 1;
        for (l, w) in layers.iter().enumerate() {
            w.affine_into(&self.inputs[l], &mut self.pre[l]);
            if l < last {
                let (_, tail) = self.inputs.split_at_mut(l + 1);
                for (a, &p) in tail[0].iter_mut().zip(&self.pre[l]) {
                    *a = relu(p);
                }
            }
        }
        &self.pre[last]
    }

    pub fn output(&self) -> &[f64] {
        self.pre.last().expect("network has at least one layer")
    }

    pub fn input(&self) -> &[f64] {
        &self.inputs[0]
    }

    /// Propagates `upstream = dL/d output` back through the recorded pass.
    /// Writes `dL/d input` into `input_grad` and, when given, accumulates
    /// `dL/dW_l` into `weight_grads`.
    pub fn backward(
        &mut self,
        layers: &[Matrix],
        upstream: &[f64],
        input_grad: &mut [f64],
        mut weight_grads: Option<&mut [Matrix]>,
    ) {
        let last = layers.len() - 1;
        self.delta[last].copy_from_slice(upstream);
        for l in (0..=last).rev() {
            if let Some(g) = weight_grads.as_deref_mut() {
                g[l].add_outer_affine(&self.delta[l], &self.inputs[l]);
            }
            if l == 0 {
                layers[0].affine_transpose_into(&self.delta[0], input_grad);
            } else {
                let (below, above) = self.delta.split_at_mut(l);
                let d_prev = &mut below[l - 1];
                layers[l].affine_transpose_into(&above[0], d_prev);
                for (d, &p) in d_prev.iter_mut().zip(&self.pre[l - 1]) {
                    if p <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
        }
    }

    /// Gradient of output `output_index` with respect to every network input.
    pub fn reverse_gradient(&mut self, layers: &[Matrix], output_index: usize) -> Result<Vec<f64>> {
        let k = self.output().len();
        contract!(
            output_index < k,
            "output index {output_index} is not a scalar output of a {k}-output network"
        );
        let mut upstream = vec![0.0; k];
        upstream[output_index] = 1.0;
        let mut grad = vec![0.0; self.inputs[0].len()];
        self.backward(layers, &upstream, &mut grad, None);
        Ok(grad)
    }
}
