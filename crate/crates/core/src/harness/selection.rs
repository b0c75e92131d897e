use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::{fit_run, Summary, LOG_LIKELIHOOD_CONVENTION};
use super::repetition_seed;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::training::TrainConfig;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSelectionConfig {
    /// Master seed. Repetition `r` uses the same split for every grid entry.
    pub seed: u64,
    pub grid: Vec<usize>,
    pub repetitions: usize,
    pub train_fraction: f64,
    pub n_w: usize,
    pub n_z: usize,
    pub train: TrainConfig,
}

impl Default for ModelSelectionConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid: vec![20, 40, 60, 80],
            repetitions: 5,
            train_fraction: 0.9,
            n_w: 200,
            n_z: 200,
            train: TrainConfig::default(),
        }
    }
}

/// One `(hidden units, repetition)` run. Exactly one of the log-likelihood
/// and the error is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub repetition: usize,
    pub seed: u64,
    pub test_log_likelihood: Option<f64>,
    /// Standard error over test points within this run.
    pub test_log_likelihood_point_se: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub hidden_units: usize,
    pub runs: Vec<RunOutcome>,
    /// Over successful runs; absent when every run failed.
    pub test_log_likelihood: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSelectionResult {
    pub format_version: u32,
    pub dataset: String,
    pub config: ModelSelectionConfig,
    pub log_likelihood_convention: String,
    pub entries: Vec<GridEntry>,
    /// Grid value with the highest mean test log-likelihood; ties go to the
    /// smallest value.
    pub selected_hidden_units: Option<usize>,
    /// False when at least one run failed.
    pub complete: bool,
}

/// Trains every grid width on `repetitions` seeded splits and selects the
/// width with the best mean held-out log-likelihood. A failing run is
/// recorded and the remaining runs continue.
pub fn model_select(name: &str, dataset: &Dataset, config: &ModelSelectionConfig) -> Result<ModelSelectionResult> {
    if config.grid.is_empty() {
        return Err(Error::Config("field 'grid': must not be empty".into()));
    }
    if config.repetitions == 0 {
        return Err(Error::Config("field 'repetitions': must be at least 1".into()));
    }
    config.train.validate()?;

    let jobs: Vec<(usize, usize)> = config
        .grid
        .iter()
        .flat_map(|&h| (0..config.repetitions).map(move |r| (h, r)))
        .collect();
    let outcomes: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(h, r)| {
            let seed = repetition_seed(config.seed, r);
            match fit_run(dataset, h, seed, config.train_fraction, &config.train, config.n_w, config.n_z) {
                Ok(run) => RunOutcome {
                    repetition: r,
                    seed,
                    test_log_likelihood: Some(run.evaluation.log_likelihood),
                    test_log_likelihood_point_se: Some(run.evaluation.log_likelihood_se),
                    error: None,
                },
                Err(e) => RunOutcome {
                    repetition: r,
                    seed,
                    test_log_likelihood: None,
                    test_log_likelihood_point_se: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let entries: Vec<GridEntry> = config
        .grid
        .iter()
        .zip(outcomes.chunks(config.repetitions))
        .map(|(&h, runs)| {
            let lls: Vec<f64> = runs.iter().filter_map(|r| r.test_log_likelihood).collect();
            GridEntry {
                hidden_units: h,
                runs: runs.to_vec(),
                test_log_likelihood: (!lls.is_empty()).then(|| Summary::of(&lls)),
            }
        })
        .collect();
    let complete = entries.iter().all(|e| e.runs.iter().all(|r| r.error.is_none()));
    Ok(ModelSelectionResult {
        format_version: FORMAT_VERSION,
        dataset: name.to_string(),
        config: config.clone(),
        log_likelihood_convention: LOG_LIKELIHOOD_CONVENTION.to_string(),
        selected_hidden_units: select(&entries),
        entries,
        complete,
    })
}

fn select(entries: &[GridEntry]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for e in entries {
        let Some(s) = e.test_log_likelihood else { continue };
        let better = match best {
            None => true,
            Some((m, h)) => s.mean > m || (s.mean == m && e.hidden_units < h),
        };
        if better {
            best = Some((s.mean, e.hidden_units));
        }
    }
    best.map(|(_, h)| h)
}

impl ModelSelectionResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TableCell {
    pub mean: Option<f64>,
    pub standard_error: Option<f64>,
}

/// Markdown table: one row per dataset, one column per hidden-unit count.
/// Cells read `mean±stderr` (two decimals); the selected cell is bold; a
/// cell whose runs all failed reads `failed`; a missing standard error is
/// left out.
pub fn selection_table(results: &[ModelSelectionResult]) -> String {
    let Some(first) = results.first() else {
        return String::new();
    };
    let columns: Vec<usize> = first.entries.iter().map(|e| e.hidden_units).collect();
    let rows: Vec<(&str, Vec<TableCell>, Option<usize>)> = results
        .iter()
        .map(|r| {
            let cells = columns
                .iter()
                .map(|h| {
                    let s = r.entries.iter().find(|e| e.hidden_units == *h).and_then(|e| e.test_log_likelihood);
                    TableCell {
                        mean: s.map(|s| s.mean),
                        standard_error: s.and_then(|s| s.standard_error),
                    }
                })
                .collect();
            let best = r.selected_hidden_units.and_then(|h| columns.iter().position(|c| *c == h));
            (r.dataset.as_str(), cells, best)
        })
        .collect();
    render_table(&columns, &rows)
}

pub(crate) fn render_table(columns: &[usize], rows: &[(&str, Vec<TableCell>, Option<usize>)]) -> String {
    let mut out = String::from("| Dataset |");
    for c in columns {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(columns.len()));
    out.push('\n');
    for (name, cells, best) in rows {
        out.push_str(&format!("| {name} |"));
        for (i, cell) in cells.iter().enumerate() {
            let text = match (cell.mean, cell.standard_error) {
                (None, _) => "failed".to_string(),
                (Some(m), Some(se)) => format!("{m:.2}±{se:.2}"),
                (Some(m), None) => format!("{m:.2}"),
            };
            if *best == Some(i) && cell.mean.is_some() {
                out.push_str(&format!(" **{text}** |"));
            } else {
                out.push_str(&format!(" {text} |"));
            }
        }
        out.push('\n');
    }
    out
}
