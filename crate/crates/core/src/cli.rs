//! Command-line interface. Every subcommand prints its resolved configuration
//! as one JSON line on stdout. Failures print one JSON line
//! `{"error": kind, "message": text}` on stderr and exit nonzero.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::data::{generate_toy, load_csv, load_features, write_csv, DatasetManifest, Standardizer};
use crate::error::{Error, Result};
use crate::harness::{evaluate, model_select, run_experiment, selection_table, ExperimentConfig, ModelSelectionConfig};
use crate::math::RngStream;
use crate::model::{NetworkArchitecture, SavedModel};
use crate::sensitivity::sensitivity_analysis;
use crate::training::{train, write_training_log, TrainConfig};
use crate::uncertainty::{decompose, predictive_grid, write_decompositions_csv, UncertaintyDecomposition};
use crate::FORMAT_VERSION;

const SENSITIVITY_STREAM: u64 = 0x5345_4e53;
const DECOMPOSE_STREAM: u64 = 0x4445_434f;
const EVALUATE_STREAM: u64 = 0x4556_414c;

#[derive(Debug, Parser)]
#[command(name = "uncsens", version, about = "Uncertainty decomposition and sensitivity analysis for Bayesian neural networks with latent inputs")]
pub struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, env = "UNCSENS_SEED")]
    pub seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the two-feature toy dataset as CSV (columns x1, x2, y).
    GenerateToy {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model and save it as JSON.
    Train(TrainArgs),
    /// Input sensitivities of the expectation, epistemic and aleatoric parts.
    Sensitivity {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// CSV report; a JSON twin is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-point expectation, epistemic and aleatoric standard deviations.
    Decompose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Add a column combining the aleatoric part with the output noise.
        #[arg(long)]
        with_noise: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Held-out log-likelihood and RMSE.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose the hidden-layer width by held-out log-likelihood.
    ModelSelect {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [20, 40, 60, 80])]
        grid: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Markdown table; the full result is written next to it as JSON.
        #[arg(long)]
        out: PathBuf,
        /// Training config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Target columns; defaults to the last column.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<String>,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[command(flatten)]
        samples: GridArgs,
    },
    /// Repeated split/train/evaluate/sensitivity runs on a manifest dataset.
    Experiment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Experiment config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Training config JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_model: PathBuf,
    /// Training log (newline-delimited JSON).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Target columns; defaults to the last column.
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<String>,
    /// Units in each of the two hidden layers.
    #[arg(long, default_value_t = 20)]
    pub hidden_units: usize,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GridArgs {
    /// Weight draws per point.
    #[arg(long, default_value_t = 200)]
    pub nw: usize,
    /// Latent draws per weight draw.
    #[arg(long, default_value_t = 200)]
    pub nz: usize,
}

impl GridArgs {
    fn check(&self) -> Result<()> {
        if self.nw < 2 || self.nz < 2 {
            return Err(Error::Config(format!(
                "--nw and --nz must be at least 2, got {} and {}",
                self.nw, self.nz
            )));
        }
        Ok(())
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", json!({"error": "usage", "message": first}));
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            1
        }
    }
}

/// Runs a parsed command on a pool of `--threads` workers.
pub fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    let seed = cli.seed;
    pool.install(|| dispatch(cli.command, seed))
}

fn dispatch(command: Command, seed: Option<u64>) -> Result<()> {
    match command {
        Command::GenerateToy { n, out } => {
            let seed = seed.unwrap_or(0);
            announce(json!({"command": "generate-toy", "n": n, "seed": seed, "out": out}));
            if n == 0 {
                return Err(Error::Config("--n must be at least 1".into()));
            }
            write_csv(&generate_toy(n, seed), &out)
        }
        Command::Train(args) => cmd_train(args, seed),
        Command::Sensitivity { model, test, grid, out } => cmd_sensitivity(&model, &test, grid, &out, seed.unwrap_or(0)),
        Command::Decompose { model, input, grid, with_noise, out } => {
            cmd_decompose(&model, &input, grid, with_noise, &out, seed.unwrap_or(0))
        }
        Command::Evaluate { model, test, grid, out } => cmd_evaluate(&model, &test, grid, &out, seed.unwrap_or(0)),
        Command::ModelSelect { data, grid, repeats, out, config, targets, train_fraction, samples } => {
            samples.check()?;
            let train = match &config {
                Some(p) => TrainConfig::from_json(&read_text(p)?)?,
                None => TrainConfig::default(),
            };
            let cfg = ModelSelectionConfig {
                seed: seed.unwrap_or(train.seed),
                grid,
                repetitions: repeats,
                train_fraction,
                n_w: samples.nw,
                n_z: samples.nz,
                train,
            };
            announce(json!({"command": "model-select", "data": data, "out": out, "config": cfg}));
            let targets = resolve_targets(&data, targets)?;
            let dataset = load_csv(&data, &targets)?;
            let name = data.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
            let result = model_select(&name, &dataset, &cfg)?;
            write_text(&out, &selection_table(std::slice::from_ref(&result)))?;
            write_text(&json_twin(&out), &result.to_json()?)
        }
        Command::Experiment { manifest, out_dir, config } => {
            let mut cfg: ExperimentConfig = match &config {
                Some(p) => serde_json::from_str(&read_text(p)?).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            announce(json!({"command": "experiment", "manifest": manifest, "out_dir": out_dir, "config": cfg}));
            let m = DatasetManifest::read(&manifest)?;
            run_experiment(&m, &cfg)?.write_outputs(&out_dir)
        }
    }
}

fn cmd_train(args: TrainArgs, seed: Option<u64>) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => TrainConfig::from_json(&read_text(p)?)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    let targets = resolve_targets(&args.data, args.targets)?;
    announce(json!({
        "command": "train",
        "data": args.data,
        "out_model": args.out_model,
        "log": args.log,
        "targets": targets,
        "hidden_units": args.hidden_units,
        "config": config,
    }));
    let raw = load_csv(&args.data, &targets)?;
    let scaler = Standardizer::fit(&raw);
    let arch = NetworkArchitecture::two_hidden(raw.n_features(), args.hidden_units, raw.n_targets());
    let outcome = train(&scaler.transform(&raw), &arch, &config)?;
    let saved = SavedModel::from_posterior(&outcome.posterior, scaler, raw.feature_names.clone(), raw.target_names.clone());
    saved.write(&args.out_model)?;
    if let Some(log) = &args.log {
        write_training_log(log, &outcome.trace)?;
    }
    Ok(())
}

fn cmd_sensitivity(model: &Path, test: &Path, grid: GridArgs, out: &Path, seed: u64) -> Result<()> {
    grid.check()?;
    announce(json!({"command": "sensitivity", "model": model, "test": test, "nw": grid.nw, "nz": grid.nz, "seed": seed, "out": out, "out_json": json_twin(out)}));
    let saved = SavedModel::read(model)?;
    let posterior = saved.posterior()?;
    let points = standardized_inputs(&saved, test)?;
    let report = sensitivity_analysis(&points, &posterior, grid.nw, grid.nz, &RngStream::new(seed, SENSITIVITY_STREAM))?
        .with_features(feature_names(&saved), saved.standardization.feature_stds.clone());
    report.write_csv(out)?;
    report.write_json(json_twin(out))
}

fn cmd_decompose(model: &Path, input: &Path, grid: GridArgs, with_noise: bool, out: &Path, seed: u64) -> Result<()> {
    grid.check()?;
    announce(json!({"command": "decompose", "model": model, "input": input, "nw": grid.nw, "nz": grid.nz, "with_noise": with_noise, "seed": seed, "out": out}));
    let saved = SavedModel::read(model)?;
    let posterior = saved.posterior()?;
    let scaler = &saved.standardization;
    let stream = RngStream::new(seed, DECOMPOSE_STREAM);
    let rows = standardized_inputs(&saved, input)?
        .iter()
        .enumerate()
        .map(|(n, x)| {
            let d = decompose(&predictive_grid(x, &posterior, grid.nw, grid.nz, &stream.substream(n as u64))?)?;
            Ok(to_original_units(d, scaler))
        })
        .collect::<Result<Vec<_>>>()?;
    let noise: Vec<f64> = posterior
        .noise_variances()
        .iter()
        .zip(&scaler.target_stds)
        .map(|(v, s)| v * s * s)
        .collect();
    write_decompositions_csv(out, &rows, with_noise.then_some(noise.as_slice()))
}

fn to_original_units(d: UncertaintyDecomposition, scaler: &Standardizer) -> UncertaintyDecomposition {
    let s = &scaler.target_stds;
    UncertaintyDecomposition {
        expectation: d.expectation.iter().enumerate().map(|(k, v)| scaler.target_to_original(k, *v)).collect(),
        epistemic_std: d.epistemic_std.iter().zip(s).map(|(v, s)| v * s).collect(),
        aleatoric_std: d.aleatoric_std.iter().zip(s).map(|(v, s)| v * s).collect(),
    }
}

fn cmd_evaluate(model: &Path, test: &Path, grid: GridArgs, out: &Path, seed: u64) -> Result<()> {
    grid.check()?;
    announce(json!({"command": "evaluate", "model": model, "test": test, "nw": grid.nw, "nz": grid.nz, "seed": seed, "out": out}));
    let saved = SavedModel::read(model)?;
    let posterior = saved.posterior()?;
    let targets = if saved.target_names.is_empty() {
        resolve_targets(test, Vec::new())?
    } else {
        saved.target_names.clone()
    };
    let raw = load_csv(test, &targets)?;
    let names = feature_names(&saved);
    let x = load_features(test, &names)?;
    let raw = crate::Dataset::new(x, raw.targets, names, raw.target_names)?;
    let e = evaluate(
        &saved.standardization.transform(&raw),
        &posterior,
        grid.nw,
        grid.nz,
        &RngStream::new(seed, EVALUATE_STREAM),
        &saved.standardization,
    )?;
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "n_test": raw.len(),
        "n_w": grid.nw,
        "n_z": grid.nz,
        "seed": seed,
        "log_likelihood_convention": crate::harness::LOG_LIKELIHOOD_CONVENTION,
        "test_log_likelihood": e.log_likelihood,
        "test_log_likelihood_se": e.log_likelihood_se,
        "rmse": e.rmse,
    });
    write_text(out, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn announce(config: serde_json::Value) {
    println!("{config}");
}

fn feature_names(saved: &SavedModel) -> Vec<String> {
    if saved.feature_names.is_empty() {
        (1..=saved.architecture.input_dim).map(|i| format!("x{i}")).collect()
    } else {
        saved.feature_names.clone()
    }
}

/// Reads the model's feature columns from `path` and standardizes them.
fn standardized_inputs(saved: &SavedModel, path: &Path) -> Result<Vec<Vec<f64>>> {
    let x = load_features(path, &feature_names(saved))?;
    if x.rows() == 0 {
        return Err(Error::Contract(format!("{} has no data rows", path.display())));
    }
    Ok((0..x.rows()).map(|n| saved.standardization.features(x.row(n))).collect())
}

fn resolve_targets(data: &Path, targets: Vec<String>) -> Result<Vec<String>> {
    if !targets.is_empty() {
        return Ok(targets);
    }
    let mut reader = csv::Reader::from_path(data).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(data, io),
        other => Error::Config(format!("{}: {other:?}", data.display())),
    })?;
    let last = reader.headers()?.iter().next_back().map(|s| s.trim().to_string());
    last.map(|t| vec![t])
        .ok_or_else(|| Error::Config(format!("{} has no header", data.display())))
}

fn json_twin(path: &Path) -> PathBuf {
    let twin = path.with_extension("json");
    if twin == path {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    } else {
        twin
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
