//! Split predictive variance into epistemic and aleatoric parts.
//!
//! Trains a small model on the toy data, then for a few inputs draws an
//! `N_w x N_z` grid of forward passes and decomposes it. The two squared
//! parts add up to the variance of the whole grid.
//!
//! ```text
//! cargo run --release --example decompose_uncertainty -- [epochs]
//! ```

use uncsens::data::{generate_toy, Standardizer};
use uncsens::math::RngStream;
use uncsens::training::train;
use uncsens::uncertainty::{decompose, predictive_grid};
use uncsens::{NetworkArchitecture, TrainConfig};

fn main() -> uncsens::Result<()> {
    let epochs: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("epochs"));
    let raw = generate_toy(500, 1);
    let scaler = Standardizer::fit(&raw);
    let data = scaler.transform(&raw);
    let arch = NetworkArchitecture::two_hidden(2, 20, 1);
    let posterior = train(&data, &arch, &TrainConfig { epochs, seed: 1, ..TrainConfig::default() })?.posterior;

    println!("{:>6} {:>6} {:>10} {:>10} {:>10} {:>12}", "x1", "x2", "mean", "epistemic", "aleatoric", "residual");
    let stream = RngStream::new(1, 99);
    for (n, (x1, x2)) in [(-3.0, 0.0), (0.0, 0.0), (6.0, 0.0), (0.0, -3.5), (0.0, 3.5)].into_iter().enumerate() {
        let x = scaler.features(&[x1, x2]);
        let grid = predictive_grid(&x, &posterior, 100, 100, &stream.substream(n as u64))?;
        let d = decompose(&grid)?;
        let s = scaler.target_stds[0];
        let samples = grid.as_slice();
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / samples.len() as f64;
        println!(
            "{x1:>6.1} {x2:>6.1} {:>10.3} {:>10.3} {:>10.3} {:>12.1e}",
            scaler.target_to_original(0, d.expectation[0]),
            d.epistemic_std[0] * s,
            d.aleatoric_std[0] * s,
            (var - d.epistemic_std[0].powi(2) - d.aleatoric_std[0].powi(2)) * s * s,
        );
    }
    println!("residual: grid variance minus epistemic^2 minus aleatoric^2 (original units)");
    Ok(())
}
