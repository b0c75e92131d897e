use crate::math::{Matrix, RngStream};
use crate::model::{NetworkEvaluator, VariationalPosterior};

/// A stochastic regression function `f(x, z; W)` with a sampling distribution
/// over `W` and a Gaussian prior `N(0, gamma)` over the scalar latent `z`.
///
/// [`VariationalPosterior`] is the main implementor; hand-built models let
/// tests check estimators against closed forms.
pub trait LatentModel: Sync {
    type Weights: Send + Sync;
    type Workspace: Send;

    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn latent_prior_variance(&self) -> f64;
    fn draw_weights(&self, stream: &mut RngStream) -> Self::Weights;
    fn workspace(&self) -> Self::Workspace;

    /// Writes `f(x, z; w)` into `out`.
    fn predict(&self, ws: &mut Self::Workspace, w: &Self::Weights, x: &[f64], z: f64, out: &mut [f64]);

    /// Writes `f(x, z; w)` into `out` and `d f_k / d x_i` into `jac`
    /// (row-major, `K x D`).
    fn predict_with_jacobian(
        &self,
        ws: &mut Self::Workspace,
        w: &Self::Weights,
        x: &[f64],
        z: f64,
        out: &mut [f64],
        jac: &mut [f64],
    );
}

impl LatentModel for VariationalPosterior {
    type Weights = Vec<Matrix>;
    type Workspace = (NetworkEvaluator, Vec<f64>);

    fn input_dim(&self) -> usize {
        self.architecture.input_dim
    }

    fn output_dim(&self) -> usize {
        self.architecture.output_dim
    }

    fn latent_prior_variance(&self) -> f64 {
        self.latent_prior_variance
    }

    fn draw_weights(&self, stream: &mut RngStream) -> Vec<Matrix> {
        self.sample_weights(stream).layers
    }

    fn workspace(&self) -> Self::Workspace {
        (
            NetworkEvaluator::new(&self.architecture),
            vec![0.0; self.architecture.output_dim],
        )
    }

    fn predict(&self, ws: &mut Self::Workspace, w: &Vec<Matrix>, x: &[f64], z: f64, out: &mut [f64]) {
        out.copy_from_slice(ws.0.forward(w, x, z));
    }

    fn predict_with_jacobian(
        &self,
        ws: &mut Self::Workspace,
        w: &Vec<Matrix>,
        x: &[f64],
        z: f64,
        out: &mut [f64],
        jac: &mut [f64],
    ) {
        let (eval, upstream) = ws;
        out.copy_from_slice(eval.forward(w, x, z));
        let d = x.len();
        for k in 0..out.len() {
            upstream.fill(0.0);
            upstream[k] = 1.0;
            let (gx, _) = eval.backward(w, upstream, None);
            jac[k * d..(k + 1) * d].copy_from_slice(gx);
        }
    }
}
