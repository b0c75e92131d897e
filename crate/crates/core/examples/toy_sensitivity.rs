//! Train on the two-feature toy problem and print the sensitivities of the
//! predictive mean, epistemic and aleatoric uncertainty per feature.
//!
//! ```text
//! cargo run --release --example toy_sensitivity -- [seed] [epochs]
//! ```

use std::time::Instant;

use uncsens::data::{generate_toy, split, Standardizer};
use uncsens::math::RngStream;
use uncsens::sensitivity::sensitivity_analysis;
use uncsens::training::train;
use uncsens::{NetworkArchitecture, TrainConfig};

fn main() -> uncsens::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let epochs: usize = args.next().map_or(3000, |s| s.parse().expect("epochs"));

    let data = generate_toy(500, seed);
    let (train_raw, test_raw) = split(&data, 0.9, seed)?;
    let scaler = Standardizer::fit(&train_raw);
    let train_set = scaler.transform(&train_raw);
    let test_set = scaler.transform(&test_raw);

    let arch = NetworkArchitecture::two_hidden(2, 20, 1);
    let config = TrainConfig { epochs, seed, ..TrainConfig::default() };
    let started = Instant::now();
    let outcome = train(&train_set, &arch, &config)?;
    let last = outcome.trace.last().map_or(f64::NAN, |r| r.energy);
    println!("trained {epochs} epochs in {:.1?}, final energy {last:.3}", started.elapsed());

    let points: Vec<Vec<f64>> = (0..test_set.len()).map(|n| test_set.x(n).to_vec()).collect();
    let started = Instant::now();
    let report = sensitivity_analysis(&points, &outcome.posterior, 200, 200, &RngStream::new(seed, 7))?;
    println!("sensitivity on {} points in {:.1?}", points.len(), started.elapsed());

    println!("{:>8} {:>12} {:>12} {:>12}", "feature", "I", "I_epistemic", "I_aleatoric");
    for (i, name) in data.feature_names.iter().enumerate() {
        println!(
            "{name:>8} {:>12.4} {:>12.4} {:>12.4}",
            report.values.expectation.get(i, 0),
            report.values.epistemic.get(i, 0),
            report.values.aleatoric.get(i, 0)
        );
    }
    Ok(())
}
