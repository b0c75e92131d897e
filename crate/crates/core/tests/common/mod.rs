#![allow(dead_code)]

use uncsens::math::{Matrix, RngStream};
use uncsens::model::NetworkArchitecture;
use uncsens::training::Example;
use uncsens::uncertainty::LatentModel;
use uncsens::{Dataset, VariationalPosterior};

/// `f(x, z) = x * z` with no weight uncertainty and a standard-normal latent.
pub struct ProductModel;

impl LatentModel for ProductModel {
    type Weights = ();
    type Workspace = ();

    fn input_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn latent_prior_variance(&self) -> f64 {
        1.0
    }
    fn draw_weights(&self, _: &mut RngStream) {}
    fn workspace(&self) {}

    fn predict(&self, _: &mut (), _: &(), x: &[f64], z: f64, out: &mut [f64]) {
        out[0] = x[0] * z;
    }

    fn predict_with_jacobian(&self, _: &mut (), _: &(), x: &[f64], z: f64, out: &mut [f64], jac: &mut [f64]) {
        out[0] = x[0] * z;
        jac[0] = z;
    }
}

/// Population standard deviation.
pub fn population_std(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// `|a - b| / max(|a|, |b|, 1)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn uniform_in(s: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * s.uniform()
}

/// A random architecture with `D <= max_d`, two hidden layers of at most
/// `max_units` units and `K <= max_k`.
pub fn random_architecture(s: &mut RngStream, max_d: usize, max_units: usize, max_k: usize) -> NetworkArchitecture {
    let pick = |s: &mut RngStream, n: usize| 1 + (s.uniform() * n as f64) as usize % n;
    let d = pick(s, max_d);
    let h1 = pick(s, max_units);
    let h2 = pick(s, max_units);
    let k = pick(s, max_k);
    NetworkArchitecture::new(d, vec![h1, h2], k)
}

/// A posterior with every parameter drawn at random, including sizeable
/// weight variances.
pub fn random_posterior(arch: NetworkArchitecture, n_train: usize, s: &mut RngStream) -> VariationalPosterior {
    let mut post = VariationalPosterior::initialize(arch, n_train, 1.0, s).unwrap();
    let mut flat = post.to_flat();
    let p = post.n_weights();
    let k = post.architecture.output_dim;
    for v in &mut flat[..p] {
        *v = uniform_in(s, -1.0, 1.0);
    }
    for v in &mut flat[p..2 * p] {
        *v = uniform_in(s, -5.0, -1.0);
    }
    for v in &mut flat[2 * p..2 * p + k] {
        *v = uniform_in(s, -1.5, 0.5);
    }
    for v in &mut flat[2 * p + k..2 * p + k + n_train] {
        *v = uniform_in(s, -1.0, 1.0);
    }
    for v in &mut flat[2 * p + k + n_train..] {
        *v = uniform_in(s, -2.0, 0.0);
    }
    post.set_from_flat(&flat).unwrap();
    post
}

/// `n` random points with `d` features and `k` targets.
pub fn random_dataset(n: usize, d: usize, k: usize, s: &mut RngStream) -> Dataset {
    let mut x = Matrix::zeros(n, d);
    let mut y = Matrix::zeros(n, k);
    x.as_mut_slice().iter_mut().for_each(|v| *v = s.standard_normal());
    y.as_mut_slice().iter_mut().for_each(|v| *v = s.standard_normal());
    Dataset::new(
        x,
        y,
        (1..=d).map(|i| format!("x{i}")).collect(),
        (1..=k).map(|i| format!("y{i}")).collect(),
    )
    .unwrap()
}

pub fn examples<'a>(data: &'a Dataset, indices: &[usize]) -> Vec<Example<'a>> {
    indices
        .iter()
        .map(|&i| Example { x: data.x(i), y: data.y(i), index: i })
        .collect()
}

pub fn rows(data: &Dataset) -> Vec<Vec<f64>> {
    (0..data.len()).map(|n| data.x(n).to_vec()).collect()
}

/// `y = 2x` on `n` evenly spaced points in `[-1, 1]`.
pub fn linear_dataset(n: usize) -> Dataset {
    let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![-1.0 + 2.0 * i as f64 / (n - 1) as f64]).collect();
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![2.0 * x[0]]).collect();
    Dataset::new(
        Matrix::from_rows(&xs).unwrap(),
        Matrix::from_rows(&ys).unwrap(),
        vec!["x".into()],
        vec!["y".into()],
    )
    .unwrap()
}
