use rayon::prelude::*;

use super::{SensitivityReport, SensitivityValues};
use crate::error::{contract, Result};
use crate::math::{Matrix, RngStream};
use crate::model::{NetworkEvaluator, VariationalPosterior};
use crate::uncertainty::{latent_draws, shifted_mean, weight_stream, LatentModel, UncertaintyDecomposition, ZERO_VARIANCE};

/// Variance floor in the denominator of `d sqrt(v) = dv / (2 sqrt(v))`.
pub const SQRT_GRAD_FLOOR: f64 = 1e-12;

/// Input gradients of the three estimators at one point, each `D x K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGradients {
    pub expectation: Matrix,
    pub epistemic_std: Matrix,
    pub aleatoric_std: Matrix,
    /// The estimator values the gradients belong to.
    pub values: UncertaintyDecomposition,
}

/// Sufficient statistics of one weight draw over its `N_z` latent draws.
struct BlockStats {
    mean: Vec<f64>,
    var: Vec<f64>,
    /// `sum_l dy_l/dx`, `K x D`.
    jac_sum: Vec<f64>,
    /// `sum_l (y_l - mean) dy_l/dx`, `K x D`.
    centered_jac_sum: Vec<f64>,
    /// `sum_l (y_l - mean)`, zero up to rounding.
    residual_sum: Vec<f64>,
}

fn block_stats<M: LatentModel>(
    model: &M,
    ws: &mut M::Workspace,
    x: &[f64],
    zs: &[f64],
    w: &M::Weights,
) -> BlockStats {
    let (d, k, n_z) = (x.len(), model.output_dim(), zs.len());
    let mut ys = vec![0.0; n_z * k];
    let mut jacs = vec![0.0; n_z * k * d];
    for ((z, y), jac) in zs.iter().zip(ys.chunks_mut(k)).zip(jacs.chunks_mut(k * d)) {
        model.predict_with_jacobian(ws, w, x, *z, y, jac);
    }
    let mut stats = BlockStats {
        mean: vec![0.0; k],
        var: vec![0.0; k],
        jac_sum: vec![0.0; k * d],
        centered_jac_sum: vec![0.0; k * d],
        residual_sum: vec![0.0; k],
    };
    for o in 0..k {
        let m = shifted_mean((0..n_z).map(|l| ys[l * k + o]));
        stats.mean[o] = m;
        let mut var = 0.0;
        for l in 0..n_z {
            let r = ys[l * k + o] - m;
            var += r * r;
            stats.residual_sum[o] += r;
            let jac = &jacs[(l * k + o) * d..(l * k + o + 1) * d];
            for i in 0..d {
                stats.jac_sum[o * d + i] += jac[i];
                stats.centered_jac_sum[o * d + i] += r * jac[i];
            }
        }
        stats.var[o] = var / n_z as f64;
    }
    stats
}

#[inline]
fn std_and_grad_scale(var: f64) -> (f64, f64) {
    if var < ZERO_VARIANCE {
        (0.0, 0.0)
    } else {
        (var.sqrt(), 0.5 / var.max(SQRT_GRAD_FLOOR).sqrt())
    }
}

/// Exact input gradients of the frozen-draw mean, epistemic-std and
/// aleatoric-std estimators at `x`. Uses the same draws as
/// [`crate::uncertainty::predictive_grid`] with the same `stream`.
pub fn point_gradients<M: LatentModel>(
    x: &[f64],
    model: &M,
    n_w: usize,
    n_z: usize,
    stream: &RngStream,
) -> Result<PointGradients> {
    contract!(
        n_w >= 2 && n_z >= 2,
        "sensitivities need N_w >= 2 and N_z >= 2, got {n_w} x {n_z}"
    );
    contract!(
        x.len() == model.input_dim(),
        "input has {} features, model expects {}",
        x.len(),
        model.input_dim()
    );
    let (d, k) = (x.len(), model.output_dim());
    let zs = latent_draws(stream, model.latent_prior_variance(), n_z)?;

    let blocks: Vec<BlockStats> = (0..n_w)
        .into_par_iter()
        .map_init(
            || model.workspace(),
            |ws, j| {
                let w = model.draw_weights(&mut weight_stream(stream, j));
                block_stats(model, ws, x, &zs, &w)
            },
        )
        .collect();

    let (nw, nz) = (n_w as f64, n_z as f64);
    let mut grads = PointGradients {
        expectation: Matrix::zeros(d, k),
        epistemic_std: Matrix::zeros(d, k),
        aleatoric_std: Matrix::zeros(d, k),
        values: UncertaintyDecomposition {
            expectation: Vec::with_capacity(k),
            epistemic_std: Vec::with_capacity(k),
            aleatoric_std: Vec::with_capacity(k),
        },
    };
    for o in 0..k {
        let e = shifted_mean(blocks.iter().map(|b| b.mean[o]));
        let epi_var = blocks.iter().map(|b| (b.mean[o] - e).powi(2)).sum::<f64>() / nw;
        let ale_var = blocks.iter().map(|b| b.var[o]).sum::<f64>() / nw;
        let (epi_std, epi_scale) = std_and_grad_scale(epi_var);
        let (ale_std, ale_scale) = std_and_grad_scale(ale_var);
        grads.values.expectation.push(e);
        grads.values.epistemic_std.push(epi_std);
        grads.values.aleatoric_std.push(ale_std);

        for i in 0..d {
            let idx = o * d + i;
            let d_mean = |b: &BlockStats| b.jac_sum[idx] / nz;
            let d_e = blocks.iter().map(d_mean).sum::<f64>() / nw;
            let d_epi_var = 2.0 / nw
                * blocks
                    .iter()
                    .map(|b| (b.mean[o] - e) * (d_mean(b) - d_e))
                    .sum::<f64>();
            let d_ale_var = 2.0 / (nw * nz)
                * blocks
                    .iter()
                    .map(|b| b.centered_jac_sum[idx] - b.residual_sum[o] * d_mean(b))
                    .sum::<f64>();
            grads.expectation.set(i, o, d_e);
            grads.epistemic_std.set(i, o, epi_scale * d_epi_var);
            grads.aleatoric_std.set(i, o, ale_scale * d_ale_var);
        }
    }
    Ok(grads)
}

/// Mean absolute estimator gradients over `test_set`. Point `n` draws from
/// `stream.substream(n)`, so a point's contribution does not depend on which
/// other points are present.
pub fn sensitivity_analysis<M: LatentModel>(
    test_set: &[Vec<f64>],
    model: &M,
    n_w: usize,
    n_z: usize,
    stream: &RngStream,
) -> Result<SensitivityReport> {
    contract!(!test_set.is_empty(), "sensitivity analysis needs at least one test point");
    let per_point: Vec<PointGradients> = test_set
        .par_iter()
        .enumerate()
        .map(|(n, x)| point_gradients(x, model, n_w, n_z, &stream.substream(n as u64)))
        .collect::<Result<_>>()?;
    let (d, k) = (model.input_dim(), model.output_dim());
    let mut values = SensitivityValues::zeros(d, k);
    let inv = 1.0 / per_point.len() as f64;
    for g in &per_point {
        for (acc, m) in [
            (&mut values.expectation, &g.expectation),
            (&mut values.epistemic, &g.epistemic_std),
            (&mut values.aleatoric, &g.aleatoric_std),
        ] {
            for (a, v) in acc.as_mut_slice().iter_mut().zip(m.as_slice()) {
                *a += v.abs() * inv;
            }
        }
    }
    Ok(SensitivityReport::single(
        values,
        test_set.len(),
        n_w,
        n_z,
        stream.master_seed(),
    ))
}

/// Mean absolute input gradient of the deterministic network at the weight
/// means with `z = 0`; `D x K`.
pub fn classic_sensitivity(test_set: &[Vec<f64>], posterior: &VariationalPosterior) -> Result<Matrix> {
    contract!(!test_set.is_empty(), "sensitivity analysis needs at least one test point");
    let arch = &posterior.architecture;
    let (d, k) = (arch.input_dim, arch.output_dim);
    let mut eval = NetworkEvaluator::new(arch);
    let mut out = Matrix::zeros(d, k);
    let mut upstream = vec![0.0; k];
    for x in test_set {
        contract!(x.len() == d, "input has {} features, model expects {d}", x.len());
        eval.forward(&posterior.weight_means, x, 0.0);
        for o in 0..k {
            upstream.fill(0.0);
            upstream[o] = 1.0;
            let (gx, _) = eval.backward(&posterior.weight_means, &upstream, None);
            for (i, g) in gx.iter().enumerate() {
                let cur = out.get(i, o);
                out.set(i, o, cur + g.abs() / test_set.len() as f64);
            }
        }
    }
    Ok(out)
}
