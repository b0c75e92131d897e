//! Heteroskedastic toy regression: `y = 7 sin(x1) + 3 |cos(x2 / 2)| eps` with
//! `x1 ~ Exponential(0.5) - 4`, `x2 ~ U(-4, 4)` and `eps ~ N(0, 1)`. The first
//! input shapes the function, the second sets the noise level.

use super::Dataset;
use crate::math::{Matrix, RngStream};

const TOY_STREAM: u64 = 0x0054_4f59;
const RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyNoise {
    Gaussian,
    /// Forces every `eps` to 0 while leaving the inputs unchanged.
    Zero,
}

#[derive(Debug, Clone)]
pub struct ToySample {
    pub dataset: Dataset,
    /// The `eps` used for each row.
    pub noise: Vec<f64>,
}

pub fn generate_toy(n: usize, seed: u64) -> Dataset {
    generate_toy_with(n, seed, ToyNoise::Gaussian).dataset
}

pub fn generate_toy_with(n: usize, seed: u64, noise: ToyNoise) -> ToySample {
    let root = RngStream::new(seed, TOY_STREAM);
    let (mut s1, mut s2, mut se) = (root.substream(1), root.substream(2), root.substream(3));
    let mut features = Matrix::zeros(n, 2);
    let mut targets = Matrix::zeros(n, 1);
    let mut eps_out = Vec::with_capacity(n);
    for i in 0..n {
        // inverse CDF of the exponential
        let x1 = -(1.0 - s1.uniform()).ln() / RATE - 4.0;
        let x2 = -4.0 + 8.0 * s2.uniform();
        let eps = match noise {
            ToyNoise::Gaussian => se.standard_normal(),
            ToyNoise::Zero => 0.0,
        };
        features.row_mut(i).copy_from_slice(&[x1, x2]);
        targets.set(i, 0, 7.0 * x1.sin() + 3.0 * (x2 / 2.0).cos().abs() * eps);
        eps_out.push(eps);
    }
    let dataset = Dataset::new(features, targets, vec!["x1".into(), "x2".into()], vec!["y".into()])
        .expect("toy shapes are consistent");
    ToySample {
        dataset,
        noise: eps_out,
    }
}
