//! Experiment orchestration: held-out log-likelihood, model selection over the
//! hidden-layer width and repeated split/train/evaluate/sensitivity runs.
//!
//! Every run derives its seeds from one master seed, so all outputs are pure
//! functions of the input data, the configuration and that seed.

mod experiment;
mod metrics;
mod selection;

pub use experiment::{
    run_experiment, run_experiment_on, ExperimentConfig, ExperimentRecord, RepetitionRecord, RepetitionTiming, Summary,
    LOG_LIKELIHOOD_CONVENTION,
};
pub use metrics::{evaluate, mixture_log_likelihood, test_log_likelihood, Evaluation};
pub use selection::{model_select, selection_table, GridEntry, ModelSelectionConfig, ModelSelectionResult, RunOutcome};

use crate::math::RngStream;

const REPETITION_STREAM: u64 = 0x5245_5045_4154;

/// Seed of repetition `r` under `master`.
pub fn repetition_seed(master: u64, r: usize) -> u64 {
    RngStream::new(master, REPETITION_STREAM).substream(r as u64).next_u64()
}

/// Mean and standard error (population std over `sqrt(n)`); the error is
/// absent for fewer than two values.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, Some(var.sqrt() / n.sqrt()))
}
