use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Evaluation};
use super::selection::{render_table, TableCell};
use super::{mean_and_se, repetition_seed};
use crate::data::{split, Dataset, DatasetManifest, Standardizer};
use crate::error::{Error, Result};
use crate::math::{Matrix, RngStream};
use crate::model::{NetworkArchitecture, VariationalPosterior};
use crate::sensitivity::{classic_sensitivity, sensitivity_analysis, SensitivityReport};
use crate::training::{train, EpochRecord, TrainConfig};
use crate::FORMAT_VERSION;

const EVAL_STREAM: u64 = 0x4556_414c;
const SENSITIVITY_STREAM: u64 = 0x5345_4e53;

/// How log-likelihoods are reported.
pub const LOG_LIKELIHOOD_CONVENTION: &str =
    "mean per-point log predictive density in original target units: standardized-space density minus sum_k ln(target_std_k); output noise included";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed. Repetition seeds derive from it; `train.seed` is ignored.
    pub seed: u64,
    pub hidden_units: usize,
    pub repetitions: usize,
    pub train_fraction: f64,
    pub n_w: usize,
    pub n_z: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            hidden_units: 20,
            repetitions: 5,
            train_fraction: 0.9,
            n_w: 200,
            n_z: 200,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.hidden_units == 0 {
            return bad("field 'hidden_units': must be at least 1".into());
        }
        if self.repetitions == 0 {
            return bad("field 'repetitions': must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("field 'train_fraction': must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.n_w < 2 || self.n_z < 2 {
            return bad(format!("fields 'n_w'/'n_z': need at least 2 each, got {} and {}", self.n_w, self.n_z));
        }
        Ok(())
    }
}

/// Mean and repetition-level standard error of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub standard_error: Option<f64>,
}

impl Summary {
    pub(crate) fn of(values: &[f64]) -> Self {
        let (mean, standard_error) = mean_and_se(values);
        Self { mean, standard_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub repetition: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub test_log_likelihood: f64,
    /// Standard error of the test log-likelihood over test points.
    pub test_log_likelihood_point_se: f64,
    pub rmse: f64,
    pub final_energy: Option<f64>,
    /// Mean absolute gradient of the network at the weight means, `D x K`.
    pub classic_sensitivity: Matrix,
}

/// Wall-clock seconds of one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionTiming {
    pub repetition: usize,
    pub train_seconds: f64,
    pub evaluate_seconds: f64,
    pub sensitivity_seconds: f64,
}

/// Everything one experiment produced. Wall-clock durations are kept out of
/// the serialized record so that it depends only on data, config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub format_version: u32,
    pub dataset: String,
    pub n_rows: usize,
    pub config: ExperimentConfig,
    pub log_likelihood_convention: String,
    pub repetitions: Vec<RepetitionRecord>,
    pub test_log_likelihood: Summary,
    pub rmse: Summary,
    pub sensitivity: SensitivityReport,
    #[serde(skip)]
    pub timings: Vec<RepetitionTiming>,
}

/// One split/standardize/train/evaluate pass.
pub(crate) struct FittedRun {
    pub posterior: VariationalPosterior,
    pub scaler: Standardizer,
    pub train: Dataset,
    pub test: Dataset,
    pub trace: Vec<EpochRecord>,
    pub evaluation: Evaluation,
    pub train_seconds: f64,
    pub evaluate_seconds: f64,
}

pub(crate) fn fit_run(
    data: &Dataset,
    hidden_units: usize,
    seed: u64,
    train_fraction: f64,
    train_config: &TrainConfig,
    n_w: usize,
    n_z: usize,
) -> Result<FittedRun> {
    let (train_raw, test_raw) = split(data, train_fraction, seed)?;
    let scaler = Standardizer::fit(&train_raw);
    let train_set = scaler.transform(&train_raw);
    let test_set = scaler.transform(&test_raw);
    let arch = NetworkArchitecture::two_hidden(data.n_features(), hidden_units, data.n_targets());
    let cfg = TrainConfig { seed, ..train_config.clone() };

    let started = Instant::now();
    let outcome = train(&train_set, &arch, &cfg)?;
    let train_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let evaluation = evaluate(&test_set, &outcome.posterior, n_w, n_z, &RngStream::new(seed, EVAL_STREAM), &scaler)?;
    Ok(FittedRun {
        posterior: outcome.posterior,
        scaler,
        train: train_set,
        test: test_set,
        trace: outcome.trace,
        evaluation,
        train_seconds,
        evaluate_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Loads the manifest's data and runs [`run_experiment_on`].
pub fn run_experiment(manifest: &DatasetManifest, config: &ExperimentConfig) -> Result<ExperimentRecord> {
    let data = manifest.load()?;
    run_experiment_on(&manifest.name, &data, config)
}

/// Repeats split, training, evaluation and sensitivity analysis
/// `config.repetitions` times and aggregates the results. Repetitions run in
/// parallel on the current rayon pool; the record does not depend on the
/// number of threads.
pub fn run_experiment_on(name: &str, data: &Dataset, config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let runs: Vec<(RepetitionRecord, SensitivityReport, RepetitionTiming)> = (0..config.repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = repetition_seed(config.seed, r);
            run_repetition(data, config, r, seed)
                .map_err(|e| e.in_run(format!("dataset '{name}', repetition {r} (seed {seed})")))
        })
        .collect::<Result<_>>()?;

    let mut repetitions = Vec::with_capacity(runs.len());
    let mut reports = Vec::with_capacity(runs.len());
    let mut timings = Vec::with_capacity(runs.len());
    for (rec, rep, t) in runs {
        repetitions.push(rec);
        reports.push(rep);
        timings.push(t);
    }
    let lls: Vec<f64> = repetitions.iter().map(|r| r.test_log_likelihood).collect();
    let rmses: Vec<f64> = repetitions.iter().map(|r| r.rmse).collect();
    Ok(ExperimentRecord {
        format_version: FORMAT_VERSION,
        dataset: name.to_string(),
        n_rows: data.len(),
        config: config.clone(),
        log_likelihood_convention: LOG_LIKELIHOOD_CONVENTION.to_string(),
        repetitions,
        test_log_likelihood: Summary::of(&lls),
        rmse: Summary::of(&rmses),
        sensitivity: SensitivityReport::aggregate(&reports)?,
        timings,
    })
}

fn run_repetition(
    data: &Dataset,
    config: &ExperimentConfig,
    repetition: usize,
    seed: u64,
) -> Result<(RepetitionRecord, SensitivityReport, RepetitionTiming)> {
    let run = fit_run(data, config.hidden_units, seed, config.train_fraction, &config.train, config.n_w, config.n_z)?;
    let points: Vec<Vec<f64>> = (0..run.test.len()).map(|n| run.test.x(n).to_vec()).collect();
    let started = Instant::now();
    let report = sensitivity_analysis(&points, &run.posterior, config.n_w, config.n_z, &RngStream::new(seed, SENSITIVITY_STREAM))?
        .with_features(data.feature_names.clone(), run.scaler.feature_stds.clone());
    let sensitivity_seconds = started.elapsed().as_secs_f64();
    let record = RepetitionRecord {
        repetition,
        seed,
        n_train: run.train.len(),
        n_test: run.test.len(),
        test_log_likelihood: run.evaluation.log_likelihood,
        test_log_likelihood_point_se: run.evaluation.log_likelihood_se,
        rmse: run.evaluation.rmse,
        final_energy: run.trace.last().map(|t| t.energy),
        classic_sensitivity: classic_sensitivity(&points, &run.posterior)?,
    };
    let timing = RepetitionTiming {
        repetition,
        train_seconds: run.train_seconds,
        evaluate_seconds: run.evaluate_seconds,
        sensitivity_seconds,
    };
    Ok((record, report, timing))
}

impl ExperimentRecord {
    /// Deterministic JSON of the record.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Markdown table with one row for this dataset and one column for the
    /// hidden-unit count.
    pub fn table(&self) -> String {
        let cell = TableCell {
            mean: Some(self.test_log_likelihood.mean),
            standard_error: self.test_log_likelihood.standard_error,
        };
        render_table(&[self.config.hidden_units], &[(self.dataset.as_str(), vec![cell], Some(0))])
    }

    /// Writes `results.json`, `table.md`, `sensitivity.csv`,
    /// `sensitivity.json` and `timing.json` into `dir`.
    pub fn write_outputs(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        write("results.json", self.to_json()?)?;
        write("table.md", self.table())?;
        self.sensitivity.write_csv(dir.join("sensitivity.csv"))?;
        self.sensitivity.write_json(dir.join("sensitivity.json"))?;
        write("timing.json", serde_json::to_string_pretty(&self.timings)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_toy;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            seed: 4,
            hidden_units: 4,
            repetitions: 2,
            n_w: 3,
            n_z: 3,
            train: TrainConfig { epochs: 2, batch_size: 16, ..TrainConfig::default() },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn record_is_reproducible_and_aggregates_repetitions() {
        let data = generate_toy(40, 1);
        let a = run_experiment_on("toy", &data, &quick()).unwrap();
        let b = run_experiment_on("toy", &data, &quick()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.repetitions.len(), 2);
        assert_eq!(a.sensitivity.repetitions.len(), 2);
        assert!(a.sensitivity.standard_errors.is_some());
        let mean = (a.sensitivity.repetitions[0].epistemic.get(1, 0) + a.sensitivity.repetitions[1].epistemic.get(1, 0)) / 2.0;
        assert_eq!(a.sensitivity.values.epistemic.get(1, 0), mean);
        assert_eq!(a.sensitivity.repetition_seeds, vec![repetition_seed(4, 0), repetition_seed(4, 1)]);
    }

    #[test]
    fn single_repetition_has_absent_standard_errors() {
        let cfg = ExperimentConfig { repetitions: 1, ..quick() };
        let rec = run_experiment_on("toy", &generate_toy(30, 2), &cfg).unwrap();
        assert!(rec.test_log_likelihood.standard_error.is_none());
        assert!(rec.sensitivity.standard_errors.is_none());
        assert!(rec.to_json().unwrap().contains("\"standard_error\": null"));
    }

    #[test]
    fn invalid_config_names_field() {
        let cfg = ExperimentConfig { n_w: 1, ..quick() };
        let err = run_experiment_on("toy", &generate_toy(30, 2), &cfg).unwrap_err().to_string();
        assert!(err.contains("n_w"), "{err}");
    }
}
