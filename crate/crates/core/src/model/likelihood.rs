use std::f64::consts::PI;

use crate::error::{contract, Error, Result};

/// Diagonal Gaussian over the `K` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLikelihood {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl GaussianLikelihood {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        contract!(
            mean.len() == variance.len(),
            "likelihood mean has {} entries but covariance has {}",
            mean.len(),
            variance.len()
        );
        if let Some(v) = variance.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!(
                "likelihood variance must be positive and finite, got {v}"
            )));
        }
        Ok(Self { mean, variance })
    }
}

/// Sum over outputs of the diagonal-Gaussian log density of `y`.
pub fn log_likelihood(y: &[f64], prediction: &GaussianLikelihood) -> Result<f64> {
    contract!(
        y.len() == prediction.mean.len(),
        "target has {} outputs, prediction has {}",
        y.len(),
        prediction.mean.len()
    );
    if let Some(v) = prediction.variance.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!("non-positive output variance {v}")));
    }
    Ok(y.iter()
        .zip(&prediction.mean)
        .zip(&prediction.variance)
        .map(|((y, m), v)| gaussian_log_density(*y, *m, *v))
        .sum())
}

#[inline]
pub(crate) fn gaussian_log_density(y: f64, mean: f64, variance: f64) -> f64 {
    let r = y - mean;
    -0.5 * (2.0 * PI * variance).ln() - 0.5 * r * r / variance
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lik(m: f64, v: f64) -> GaussianLikelihood {
        GaussianLikelihood::new(vec![m], vec![v]).unwrap()
    }

    #[test]
    fn density_at_mean_with_unit_normaliser_is_zero() {
        let v = 1.0 / (2.0 * PI);
        assert_eq!(log_likelihood(&[1.25], &lik(1.25, v)).unwrap(), 0.0);
    }

    #[test]
    fn standard_normal_at_mean() {
        let ll = log_likelihood(&[0.0], &lik(0.0, 1.0)).unwrap();
        assert!((ll - (-0.918_938_533_204_672_7)).abs() < 1e-15);
    }

    #[test]
    fn shift_invariance() {
        let p = GaussianLikelihood::new(vec![0.3, -1.0], vec![0.5, 2.0]).unwrap();
        let shifted = GaussianLikelihood::new(vec![10.3, 9.0], vec![0.5, 2.0]).unwrap();
        let a = log_likelihood(&[1.0, 1.0], &p).unwrap();
        let b = log_likelihood(&[11.0, 11.0], &shifted).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn concave_in_target() {
        let p = lik(0.4, 0.7);
        let h = 1e-3;
        for y in [-3.0, 0.0, 0.4, 2.5] {
            let f = |t: f64| log_likelihood(&[t], &p).unwrap();
            assert!(f(y + h) - 2.0 * f(y) + f(y - h) < 0.0);
        }
    }

    #[test]
    fn non_positive_covariance_is_domain_error() {
        assert!(matches!(
            GaussianLikelihood::new(vec![0.0], vec![0.0]),
            Err(Error::Domain(_))
        ));
        let bad = GaussianLikelihood {
            mean: vec![0.0],
            variance: vec![-1.0],
        };
        assert!(matches!(log_likelihood(&[0.0], &bad), Err(Error::Domain(_))));
    }
}
