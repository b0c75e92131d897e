//! Pick the hidden-layer width by held-out log-likelihood and print the
//! markdown table.
//!
//! ```text
//! cargo run --release --example model_selection -- [epochs]
//! ```

use uncsens::data::generate_toy;
use uncsens::harness::{model_select, selection_table, ModelSelectionConfig};
use uncsens::TrainConfig;

fn main() -> uncsens::Result<()> {
    let epochs: usize = std::env::args().nth(1).map_or(300, |s| s.parse().expect("epochs"));
    let data = generate_toy(300, 5);
    let config = ModelSelectionConfig {
        grid: vec![5, 10, 20],
        repetitions: 3,
        n_w: 30,
        n_z: 30,
        train: TrainConfig { epochs, ..TrainConfig::default() },
        ..ModelSelectionConfig::default()
    };
    let result = model_select("toy", &data, &config)?;
    for entry in &result.entries {
        let lls: Vec<String> = entry
            .runs
            .iter()
            .map(|r| r.test_log_likelihood.map_or("failed".into(), |v| format!("{v:.3}")))
            .collect();
        println!("{:>3} units: {}", entry.hidden_units, lls.join("  "));
    }
    println!("\n{}", selection_table(&[result]));
    Ok(())
}
