use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::math::Matrix;

/// Per-column affine map to zero mean and unit (population) standard
/// deviation. Constant columns keep std 1 and are flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub target_means: Vec<f64>,
    pub target_stds: Vec<f64>,
    #[serde(default)]
    pub constant_features: Vec<bool>,
    #[serde(default)]
    pub constant_targets: Vec<bool>,
}

fn column_stats(m: &Matrix) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let n = m.rows() as f64;
    let mut means = Vec::with_capacity(m.cols());
    let mut stds = Vec::with_capacity(m.cols());
    let mut constant = Vec::with_capacity(m.cols());
    for c in 0..m.cols() {
        let col = m.column(c);
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        let is_const = !(std > 1e-12 * mean.abs().max(1.0));
        means.push(mean);
        stds.push(if is_const { 1.0 } else { std });
        constant.push(is_const);
    }
    (means, stds, constant)
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Self {
        let (feature_means, feature_stds, constant_features) = column_stats(&data.features);
        let (target_means, target_stds, constant_targets) = column_stats(&data.targets);
        Self {
            feature_means,
            feature_stds,
            target_means,
            target_stds,
            constant_features,
            constant_targets,
        }
    }

    /// The identity map for `d` features and `k` targets.
    pub fn identity(d: usize, k: usize) -> Self {
        Self {
            feature_means: vec![0.0; d],
            feature_stds: vec![1.0; d],
            target_means: vec![0.0; k],
            target_stds: vec![1.0; k],
            constant_features: vec![false; d],
            constant_targets: vec![false; k],
        }
    }

    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn targets(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.target_means.iter().zip(&self.target_stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn target_to_original(&self, k: usize, value: f64) -> f64 {
        value * self.target_stds[k] + self.target_means[k]
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        self.map(data, |v, m, s| (v - m) / s)
    }

    pub fn inverse_transform(&self, data: &Dataset) -> Dataset {
        self.map(data, |v, m, s| v * s + m)
    }

    fn map(&self, data: &Dataset, f: impl Fn(f64, f64, f64) -> f64) -> Dataset {
        let apply = |mat: &Matrix, means: &[f64], stds: &[f64]| {
            let mut out = mat.clone();
            for r in 0..out.rows() {
                for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                    *v = f(*v, means[c], stds[c]);
                }
            }
            out
        };
        Dataset {
            features: apply(&data.features, &self.feature_means, &self.feature_stds),
            targets: apply(&data.targets, &self.target_means, &self.target_stds),
            feature_names: data.feature_names.clone(),
            target_names: data.target_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dataset(rows: Vec<Vec<f64>>) -> Dataset {
        let features: Vec<Vec<f64>> = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
        let targets: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[r.len() - 1]]).collect();
        let d = features[0].len();
        Dataset::new(
            Matrix::from_rows(&features).unwrap(),
            Matrix::from_rows(&targets).unwrap(),
            (0..d).map(|i| format!("x{i}")).collect(),
            vec!["y".into()],
        )
        .unwrap()
    }

    #[test]
    fn constant_column_is_flagged_and_kept() {
        let d = dataset(vec![vec![1.0, 5.0, 0.0], vec![2.0, 5.0, 1.0], vec![3.0, 5.0, 2.0]]);
        let s = Standardizer::fit(&d);
        assert_eq!(s.constant_features, vec![false, true]);
        assert_eq!(s.feature_stds[1], 1.0);
        let t = s.transform(&d);
        assert_eq!(t.features.column(1), vec![0.0; 3]);
        assert!((t.features.column(0).iter().sum::<f64>()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..20)
        ) {
            let d = dataset(rows);
            let s = Standardizer::fit(&d);
            let back = s.inverse_transform(&s.transform(&d));
            for (a, b) in back.features.as_slice().iter().zip(d.features.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
            for (a, b) in back.targets.as_slice().iter().zip(d.targets.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
