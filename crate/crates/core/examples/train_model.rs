//! Train on a CSV file and save the model and its training log.
//!
//! ```text
//! cargo run --release --example train_model -- data.csv target_column model.json [epochs]
//! ```
//!
//! Without arguments the toy dataset is used and files go to the temp dir.

use uncsens::data::{generate_toy, load_csv, Standardizer};
use uncsens::training::{train, write_training_log};
use uncsens::{NetworkArchitecture, SavedModel, TrainConfig};

fn main() -> uncsens::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = std::env::temp_dir();
    let (raw, model_path) = match args.as_slice() {
        [data, target, model, ..] => (load_csv(data, &[target.clone()])?, model.into()),
        _ => (generate_toy(500, 0), tmp.join("toy_model.json")),
    };
    let epochs = args.get(3).map_or(300, |s| s.parse().expect("epochs"));

    let scaler = Standardizer::fit(&raw);
    let arch = NetworkArchitecture::two_hidden(raw.n_features(), 20, raw.n_targets());
    let config = TrainConfig { epochs, ..TrainConfig::default() };
    let outcome = train(&scaler.transform(&raw), &arch, &config)?;

    for rec in outcome.trace.iter().step_by((epochs / 10).max(1)) {
        println!(
            "epoch {:>5}  energy {:>10.2}  kl(W) {:>9.2}  kl(z) {:>8.2}  fit {:>10.2}",
            rec.epoch, rec.energy, rec.kl_weight_term, rec.kl_latent_term, rec.likelihood_term
        );
    }
    let noise: Vec<String> = outcome.posterior.noise_variances().iter().map(|v| format!("{v:.4}")).collect();
    println!("output noise variance (standardized): {}", noise.join(", "));

    SavedModel::from_posterior(&outcome.posterior, scaler, raw.feature_names.clone(), raw.target_names.clone())
        .write(&model_path)?;
    let log_path = model_path.with_extension("log.ndjson");
    write_training_log(&log_path, &outcome.trace)?;
    println!("model: {}\nlog: {}", model_path.display(), log_path.display());
    Ok(())
}
