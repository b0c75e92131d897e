//! Run the repeated split/train/evaluate/sensitivity protocol on a dataset
//! manifest and write results.json, table.md, sensitivity.csv,
//! sensitivity.json and timing.json.
//!
//! ```text
//! cargo run --release --example experiment -- [manifest.json] [out_dir] [epochs]
//! ```
//!
//! Without a manifest the toy dataset is generated into the output directory.

use std::path::PathBuf;

use uncsens::data::{generate_toy, write_csv, DatasetManifest};
use uncsens::harness::{run_experiment, ExperimentConfig};
use uncsens::TrainConfig;

fn main() -> uncsens::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out_dir = args.get(1).map_or_else(|| std::env::temp_dir().join("uncsens_experiment"), PathBuf::from);
    let epochs = args.get(2).map_or(3000, |s| s.parse().expect("epochs"));
    std::fs::create_dir_all(&out_dir).expect("output directory");

    let manifest = match args.first().filter(|a| a.as_str() != "-") {
        Some(path) => DatasetManifest::read(path)?,
        None => {
            let csv = out_dir.join("toy.csv");
            write_csv(&generate_toy(500, 0), &csv)?;
            DatasetManifest {
                name: "toy".into(),
                path: csv,
                target_columns: vec!["y".into()],
                n_rows: 500,
                d_features: 2,
            }
        }
    };
    let config = ExperimentConfig { train: TrainConfig { epochs, ..TrainConfig::default() }, ..ExperimentConfig::default() };
    let record = run_experiment(&manifest, &config)?;
    record.write_outputs(&out_dir)?;

    let ll = record.test_log_likelihood;
    println!("{}: test log-likelihood {:.3} ± {:.3}", record.dataset, ll.mean, ll.standard_error.unwrap_or(f64::NAN));
    let report = &record.sensitivity;
    let se = report.standard_errors.as_ref();
    for (i, name) in report.feature_names.iter().enumerate() {
        let pm = |v: f64, e: Option<f64>| format!("{v:.3}±{:.3}", e.unwrap_or(f64::NAN));
        println!(
            "{name:>8}  I {}  I_epistemic {}  I_aleatoric {}",
            pm(report.values.expectation.get(i, 0), se.map(|s| s.expectation.get(i, 0))),
            pm(report.values.epistemic.get(i, 0), se.map(|s| s.epistemic.get(i, 0))),
            pm(report.values.aleatoric.get(i, 0), se.map(|s| s.aleatoric.get(i, 0))),
        );
    }
    println!("outputs in {}", out_dir.display());
    Ok(())
}
