use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::math::Matrix;
use crate::FORMAT_VERSION;

/// The three sensitivity matrices, each `D x K` (feature by output).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityValues {
    pub expectation: Matrix,
    pub epistemic: Matrix,
    pub aleatoric: Matrix,
}

impl SensitivityValues {
    pub fn zeros(d: usize, k: usize) -> Self {
        Self {
            expectation: Matrix::zeros(d, k),
            epistemic: Matrix::zeros(d, k),
            aleatoric: Matrix::zeros(d, k),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.expectation.shape()
    }

    fn parts(&self) -> [&Matrix; 3] {
        [&self.expectation, &self.epistemic, &self.aleatoric]
    }

    fn map2(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let zip = |a: &Matrix, b: &Matrix| {
            let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| f(*x, *y)).collect();
            Matrix::from_vec(a.rows(), a.cols(), data).expect("same shape")
        };
        Self {
            expectation: zip(&self.expectation, &other.expectation),
            epistemic: zip(&self.epistemic, &other.epistemic),
            aleatoric: zip(&self.aleatoric, &other.aleatoric),
        }
    }

    fn scale_rows(&self, by: &[f64]) -> Self {
        let scale = |m: &Matrix| {
            let mut out = m.clone();
            for (i, s) in by.iter().enumerate() {
                out.row_mut(i).iter_mut().for_each(|v| *v /= s);
            }
            out
        };
        Self {
            expectation: scale(&self.expectation),
            epistemic: scale(&self.epistemic),
            aleatoric: scale(&self.aleatoric),
        }
    }
}

/// Sensitivities over a test set, optionally aggregated over repetitions.
///
/// `values` are gradients in standardized input space. Dividing by the
/// feature standard deviations gives [`SensitivityReport::destandardized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub feature_stds: Vec<f64>,
    pub n_test: usize,
    pub n_w: usize,
    pub n_z: usize,
    /// Master seed of the run, or of the first repetition when aggregated.
    pub seed: u64,
    pub values: SensitivityValues,
    /// Standard error over repetitions; absent for a single run.
    pub standard_errors: Option<SensitivityValues>,
    pub repetitions: Vec<SensitivityValues>,
    pub repetition_seeds: Vec<u64>,
}

impl SensitivityReport {
    pub fn single(values: SensitivityValues, n_test: usize, n_w: usize, n_z: usize, seed: u64) -> Self {
        let (d, _) = values.shape();
        Self {
            format_version: FORMAT_VERSION,
            feature_names: (1..=d).map(|i| format!("x{i}")).collect(),
            feature_stds: vec![1.0; d],
            n_test,
            n_w,
            n_z,
            seed,
            values,
            standard_errors: None,
            repetitions: Vec::new(),
            repetition_seeds: Vec::new(),
        }
    }

    pub fn with_features(mut self, names: Vec<String>, stds: Vec<f64>) -> Self {
        self.feature_names = names;
        self.feature_stds = stds;
        self
    }

    pub fn n_features(&self) -> usize {
        self.values.shape().0
    }

    pub fn n_outputs(&self) -> usize {
        self.values.shape().1
    }

    pub fn destandardized(&self) -> SensitivityValues {
        self.values.scale_rows(&self.feature_stds)
    }

    /// Mean over repetitions with the standard error `std / sqrt(R)`
    /// (population std). A single repetition has no standard error.
    pub fn aggregate(runs: &[SensitivityReport]) -> Result<Self> {
        contract!(!runs.is_empty(), "nothing to aggregate");
        let first = &runs[0];
        contract!(
            runs.iter().all(|r| r.values.shape() == first.values.shape()),
            "repetitions disagree on report shape"
        );
        let r = runs.len() as f64;
        let (d, k) = first.values.shape();
        let mut mean = SensitivityValues::zeros(d, k);
        for run in runs {
            mean = mean.map2(&run.values, |a, b| a + b);
        }
        mean = mean.map2(&mean, |a, _| a / r);
        let standard_errors = (runs.len() > 1).then(|| {
            let mut sq = SensitivityValues::zeros(d, k);
            for run in runs {
                let dev = run.values.map2(&mean, |a, m| (a - m) * (a - m));
                sq = sq.map2(&dev, |a, b| a + b);
            }
            sq.map2(&sq, |s, _| (s / r).sqrt() / r.sqrt())
        });
        Ok(Self {
            format_version: FORMAT_VERSION,
            feature_names: first.feature_names.clone(),
            feature_stds: first.feature_stds.clone(),
            n_test: first.n_test,
            n_w: first.n_w,
            n_z: first.n_z,
            seed: first.seed,
            values: mean,
            standard_errors,
            repetitions: runs.iter().map(|r| r.values.clone()).collect(),
            repetition_seeds: runs.iter().map(|r| r.seed).collect(),
        })
    }

    /// CSV with `feature_index, feature_name, output_index, I, I_epistemic,
    /// I_aleatoric`; one row per feature and output.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        let io = |e| Error::io(path, e);
        writeln!(f, "feature_index,feature_name,output_index,I,I_epistemic,I_aleatoric").map_err(io)?;
        let [e, ep, al] = self.values.parts();
        for i in 0..self.n_features() {
            for k in 0..self.n_outputs() {
                writeln!(
                    f,
                    "{i},{},{k},{},{},{}",
                    self.feature_names[i],
                    e.get(i, k),
                    ep.get(i, k),
                    al.get(i, k)
                )
                .map_err(io)?;
            }
        }
        f.flush().map_err(io)
    }

    /// JSON carrying values, destandardized values, repetition-level values
    /// and standard errors.
    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["destandardized"] = serde_json::to_value(self.destandardized())?;
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}
