use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{shifted_mean, PredictiveSampleGrid};
use crate::error::{contract, Error, Result};

/// Variances below this are reported as exactly zero standard deviation.
pub const ZERO_VARIANCE: f64 = 1e-300;

#[inline]
pub(crate) fn guarded_sqrt(var: f64) -> f64 {
    if var < ZERO_VARIANCE {
        0.0
    } else {
        var.sqrt()
    }
}

/// Per-output predictive mean with epistemic and aleatoric standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyDecomposition {
    pub expectation: Vec<f64>,
    pub epistemic_std: Vec<f64>,
    pub aleatoric_std: Vec<f64>,
}

impl UncertaintyDecomposition {
    /// `sqrt(aleatoric^2 + noise)`, the aleatoric spread including the
    /// additive output noise that the plain decomposition leaves out.
    pub fn aleatoric_with_noise(&self, noise_variances: &[f64]) -> Vec<f64> {
        self.aleatoric_std
            .iter()
            .zip(noise_variances)
            .map(|(a, v)| (a * a + v).sqrt())
            .collect()
    }
}

pub fn decompose(grid: &PredictiveSampleGrid) -> Result<UncertaintyDecomposition> {
    let (n_w, n_z, k) = (grid.n_w(), grid.n_z(), grid.n_outputs());
    contract!(
        n_w >= 2 && n_z >= 2,
        "variance estimates need N_w >= 2 and N_z >= 2, got {n_w} x {n_z}"
    );
    let mut out = UncertaintyDecomposition {
        expectation: Vec::with_capacity(k),
        epistemic_std: Vec::with_capacity(k),
        aleatoric_std: Vec::with_capacity(k),
    };
    for o in 0..k {
        let mut row_means = Vec::with_capacity(n_w);
        let mut row_vars = Vec::with_capacity(n_w);
        for w in 0..n_w {
            let row = (0..n_z).map(|z| grid.get(w, z, o));
            let m = shifted_mean(row.clone());
            row_vars.push(row.map(|v| (v - m) * (v - m)).sum::<f64>() / n_z as f64);
            row_means.push(m);
        }
        let e = shifted_mean(row_means.iter().copied());
        let epi_var = row_means.iter().map(|m| (m - e) * (m - e)).sum::<f64>() / n_w as f64;
        let ale_var = row_vars.iter().sum::<f64>() / n_w as f64;
        out.expectation.push(e);
        out.epistemic_std.push(guarded_sqrt(epi_var));
        out.aleatoric_std.push(guarded_sqrt(ale_var));
    }
    Ok(out)
}

/// CSV with `point_index, output_index, expectation, epistemic_std,
/// aleatoric_std`, plus `aleatoric_with_noise_std` when noise variances are
/// supplied.
pub fn write_decompositions_csv(
    path: impl AsRef<Path>,
    rows: &[UncertaintyDecomposition],
    noise_variances: Option<&[f64]>,
) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io = |e| Error::io(path, e);
    write!(f, "point_index,output_index,expectation,epistemic_std,aleatoric_std").map_err(io)?;
    if noise_variances.is_some() {
        write!(f, ",aleatoric_with_noise_std").map_err(io)?;
    }
    writeln!(f).map_err(io)?;
    for (n, d) in rows.iter().enumerate() {
        let noisy = noise_variances.map(|v| d.aleatoric_with_noise(v));
        for k in 0..d.expectation.len() {
            write!(
                f,
                "{n},{k},{},{},{}",
                d.expectation[k], d.epistemic_std[k], d.aleatoric_std[k]
            )
            .map_err(io)?;
            if let Some(noisy) = &noisy {
                write!(f, ",{}", noisy[k]).map_err(io)?;
            }
            writeln!(f).map_err(io)?;
        }
    }
    f.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::RngStream;
    use proptest::prelude::*;

    fn population_variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn two_by_two_by_hand() {
        let g = PredictiveSampleGrid::from_rows(&[vec![0.0, 2.0], vec![4.0, 6.0]]).unwrap();
        let d = decompose(&g).unwrap();
        assert_eq!(d.expectation, vec![3.0]);
        assert_eq!(d.epistemic_std, vec![2.0]);
        assert_eq!(d.aleatoric_std, vec![1.0]);
        assert_eq!(population_variance(&[0.0, 2.0, 4.0, 6.0]), 5.0);
    }

    #[test]
    fn constant_grid() {
        let g = PredictiveSampleGrid::from_vec(3, 4, 2, vec![1.7; 24]).unwrap();
        let d = decompose(&g).unwrap();
        assert_eq!(d.expectation, vec![1.7, 1.7]);
        assert_eq!(d.epistemic_std, vec![0.0, 0.0]);
        assert_eq!(d.aleatoric_std, vec![0.0, 0.0]);
    }

    #[test]
    fn variation_only_across_weights() {
        let g = PredictiveSampleGrid::from_rows(&[vec![1.0; 5], vec![3.0; 5], vec![-2.0; 5]]).unwrap();
        let d = decompose(&g).unwrap();
        assert_eq!(d.aleatoric_std, vec![0.0]);
        assert!(d.epistemic_std[0] > 0.0);
    }

    #[test]
    fn too_small_grid_rejected() {
        let g = PredictiveSampleGrid::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(decompose(&g), Err(Error::Contract(_))));
    }

    #[test]
    fn noise_column() {
        let d = UncertaintyDecomposition {
            expectation: vec![0.0],
            epistemic_std: vec![0.0],
            aleatoric_std: vec![3.0],
        };
        assert_eq!(d.aleatoric_with_noise(&[16.0]), vec![5.0]);
    }

    fn grid_strategy() -> impl Strategy<Value = PredictiveSampleGrid> {
        (2usize..8, 2usize..8, any::<u64>()).prop_map(|(w, z, seed)| {
            let mut s = RngStream::new(seed, 0);
            let v: Vec<f64> = (0..w * z).map(|_| 3.0 * s.standard_normal() + 1.0).collect();
            PredictiveSampleGrid::from_vec(w, z, 1, v).unwrap()
        })
    }

    fn rows(g: &PredictiveSampleGrid) -> Vec<Vec<f64>> {
        (0..g.n_w()).map(|w| (0..g.n_z()).map(|z| g.get(w, z, 0)).collect()).collect()
    }

    fn close(a: &UncertaintyDecomposition, b: &UncertaintyDecomposition, tol: f64) -> bool {
        let c = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol * p.abs().max(1.0));
        c(&a.expectation, &b.expectation) && c(&a.epistemic_std, &b.epistemic_std) && c(&a.aleatoric_std, &b.aleatoric_std)
    }

    proptest! {
        #[test]
        fn law_of_total_variance(g in grid_strategy()) {
            let d = decompose(&g).unwrap();
            let total = population_variance(g.as_slice());
            let lhs = d.epistemic_std[0].powi(2) + d.aleatoric_std[0].powi(2);
            prop_assert!((lhs - total).abs() <= 1e-10 * total);
        }

        #[test]
        fn permutations_leave_it_unchanged(g in grid_strategy(), shift in 1usize..7) {
            let d = decompose(&g).unwrap();
            let mut r = rows(&g);
            // rotate each n_z row by a different amount, then reverse n_w
            for (i, row) in r.iter_mut().enumerate() {
                let n = row.len();
                row.rotate_left((shift + i) % n);
            }
            r.reverse();
            let p = decompose(&PredictiveSampleGrid::from_rows(&r).unwrap()).unwrap();
            prop_assert!(close(&d, &p, 1e-12));
        }

        #[test]
        fn shift_and_scale(g in grid_strategy(), c in 0.1f64..10.0, b in -50.0f64..50.0) {
            let d = decompose(&g).unwrap();
            let shifted: Vec<Vec<f64>> = rows(&g).into_iter().map(|r| r.into_iter().map(|v| v + b).collect()).collect();
            let s = decompose(&PredictiveSampleGrid::from_rows(&shifted).unwrap()).unwrap();
            prop_assert!((s.expectation[0] - d.expectation[0] - b).abs() < 1e-9);
            prop_assert!((s.epistemic_std[0] - d.epistemic_std[0]).abs() < 1e-9);
            prop_assert!((s.aleatoric_std[0] - d.aleatoric_std[0]).abs() < 1e-9);

            let scaled: Vec<Vec<f64>> = rows(&g).into_iter().map(|r| r.into_iter().map(|v| v * c).collect()).collect();
            let s = decompose(&PredictiveSampleGrid::from_rows(&scaled).unwrap()).unwrap();
            prop_assert!((s.expectation[0] - c * d.expectation[0]).abs() < 1e-10 * c.max(1.0) * d.expectation[0].abs().max(1.0));
            prop_assert!((s.epistemic_std[0] - c * d.epistemic_std[0]).abs() < 1e-10 * (c * d.epistemic_std[0]).max(1.0));
            prop_assert!((s.aleatoric_std[0] - c * d.aleatoric_std[0]).abs() < 1e-10 * (c * d.aleatoric_std[0]).max(1.0));
        }
    }
}
