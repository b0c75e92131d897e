mod common;

use common::*;
use uncsens::math::{Matrix, RngStream};
use uncsens::model::{NetworkArchitecture, WeightSample};
use uncsens::sensitivity::{classic_sensitivity, point_gradients, sensitivity_analysis};
use uncsens::uncertainty::latent_draws;
use uncsens::VariationalPosterior;

#[test]
fn product_model_aleatoric_gradient_is_latent_std() {
    for (i, x) in [-2.5, -0.3, 0.7, 4.0].into_iter().enumerate() {
        let stream = RngStream::new(11, i as u64);
        let g = point_gradients(&[x], &ProductModel, 6, 50, &stream).unwrap();
        let zs = latent_draws(&stream, 1.0, 50).unwrap();
        let s = population_std(&zs);
        let got = g.aleatoric_std.get(0, 0);
        assert!((got - x.signum() * s).abs() <= 1e-12 * s, "{got} vs {}", x.signum() * s);
        assert!((g.values.aleatoric_std[0] - x.abs() * s).abs() <= 1e-12 * x.abs() * s);
        assert_eq!(g.epistemic_std.get(0, 0), 0.0);
        assert_eq!(g.values.epistemic_std[0], 0.0);
    }
}

#[test]
fn deterministic_linear_model() {
    let arch = NetworkArchitecture::new(1, vec![], 1);
    let w = Matrix::from_rows(&[vec![2.0, 0.0, 0.5]]).unwrap();
    let post = VariationalPosterior::point_mass(arch, WeightSample::new(vec![w]), 1e-300, &[1.0]).unwrap();
    let g = point_gradients(&[0.4], &post, 4, 4, &RngStream::new(0, 0)).unwrap();
    assert!((g.expectation.get(0, 0) - 2.0).abs() < 1e-15);
    assert_eq!(g.epistemic_std.get(0, 0), 0.0);
    assert_eq!(g.aleatoric_std.get(0, 0), 0.0);
}

/// Central differences of the frozen-draw estimators against the reverse-mode
/// gradients on random networks.
#[test]
fn gradients_match_finite_differences() {
    let mut s = RngStream::new(5, 0);
    let h = 1e-5;
    for net in 0..20 {
        let arch = random_architecture(&mut s, 4, 8, 2);
        let post = random_posterior(arch.clone(), 1, &mut s);
        let x: Vec<f64> = (0..arch.input_dim).map(|_| s.standard_normal()).collect();
        let stream = RngStream::new(net, 1);
        let g = point_gradients(&x, &post, 5, 5, &stream).unwrap();
        for i in 0..arch.input_dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let vp = point_gradients(&xp, &post, 5, 5, &stream).unwrap().values;
            let vm = point_gradients(&xm, &post, 5, 5, &stream).unwrap().values;
            for k in 0..arch.output_dim {
                let fd = |a: &[f64], b: &[f64]| (a[k] - b[k]) / (2.0 * h);
                let pairs = [
                    (g.expectation.get(i, k), fd(&vp.expectation, &vm.expectation)),
                    (g.epistemic_std.get(i, k), fd(&vp.epistemic_std, &vm.epistemic_std)),
                    (g.aleatoric_std.get(i, k), fd(&vp.aleatoric_std, &vm.aleatoric_std)),
                ];
                for (a, f) in pairs {
                    assert!(rel_err(a, f) <= 1e-4, "net {net}, x{i}, y{k}: {a} vs {f}");
                }
            }
        }
    }
}

#[test]
fn common_random_numbers_are_bitwise_stable() {
    let mut s = RngStream::new(8, 0);
    let post = random_posterior(NetworkArchitecture::two_hidden(3, 6, 2), 1, &mut s);
    let stream = RngStream::new(3, 3);
    let a = point_gradients(&[0.1, -0.2, 0.3], &post, 7, 9, &stream).unwrap();
    let b = point_gradients(&[0.1, -0.2, 0.3], &post, 7, 9, &stream).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ignored_feature_has_zero_sensitivity() {
    let mut s = RngStream::new(2, 0);
    let mut post = random_posterior(NetworkArchitecture::two_hidden(3, 6, 1), 1, &mut s);
    let first = &mut post.weight_means[0];
    for r in 0..first.rows() {
        first.set(r, 1, 0.0);
        post.weight_log_variances[0].set(r, 1, uncsens::model::DEGENERATE_LOG_VARIANCE);
    }
    let points: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| s.standard_normal()).collect()).collect();
    let report = sensitivity_analysis(&points, &post, 6, 6, &RngStream::new(1, 1)).unwrap();
    assert_eq!(report.values.expectation.get(1, 0), 0.0);
    assert_eq!(report.values.epistemic.get(1, 0), 0.0);
    assert_eq!(report.values.aleatoric.get(1, 0), 0.0);
    assert!(report.values.expectation.get(0, 0) > 0.0);
}

#[test]
fn single_point_report_is_absolute_point_gradient() {
    let mut s = RngStream::new(4, 0);
    let post = random_posterior(NetworkArchitecture::two_hidden(2, 5, 1), 1, &mut s);
    let stream = RngStream::new(6, 0);
    let x = vec![0.3, -1.1];
    let report = sensitivity_analysis(&[x.clone()], &post, 5, 5, &stream).unwrap();
    let g = point_gradients(&x, &post, 5, 5, &stream.substream(0)).unwrap();
    for i in 0..2 {
        assert_eq!(report.values.expectation.get(i, 0), g.expectation.get(i, 0).abs());
        assert_eq!(report.values.epistemic.get(i, 0), g.epistemic_std.get(i, 0).abs());
        assert_eq!(report.values.aleatoric.get(i, 0), g.aleatoric_std.get(i, 0).abs());
    }
}

#[test]
fn duplicated_points_with_shared_draws_leave_report_unchanged() {
    // With the product model every point shares the same latent spread, so a
    // set of identical summands averages to the same value.
    let pts = vec![vec![1.5], vec![-0.5]];
    let stream = RngStream::new(0, 0);
    let once: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(n, x)| point_gradients(x, &ProductModel, 3, 8, &stream.substream(n as u64)).unwrap().aleatoric_std.get(0, 0).abs())
        .collect();
    let single = sensitivity_analysis(&[pts[0].clone()], &ProductModel, 3, 8, &stream).unwrap();
    let doubled = sensitivity_analysis(&[pts[0].clone(), pts[0].clone()], &ProductModel, 3, 8, &RngStream::new(0, 0)).unwrap();
    assert_eq!(single.values.aleatoric.get(0, 0), once[0]);
    // Point 1 of `doubled` uses a different stream; the average equals the
    // single-point value only in expectation, so compare with shared draws.
    let shared: Vec<Vec<f64>> = vec![pts[0].clone(); 4];
    let avg = shared
        .iter()
        .map(|x| point_gradients(x, &ProductModel, 3, 8, &stream.substream(0)).unwrap().aleatoric_std.get(0, 0).abs())
        .sum::<f64>()
        / 4.0;
    assert_eq!(avg, once[0]);
    assert!(doubled.values.aleatoric.get(0, 0) > 0.0);
}

#[test]
fn rescaled_feature_scales_sensitivities_inversely() {
    let mut s = RngStream::new(9, 0);
    let post = random_posterior(NetworkArchitecture::two_hidden(2, 6, 1), 1, &mut s);
    let c = 4.0;
    // Inputs for feature 0 are multiplied by c; the first-layer column is
    // divided by c so the network computes the same function.
    let mut scaled = post.clone();
    for r in 0..scaled.weight_means[0].rows() {
        let m = scaled.weight_means[0].get(r, 0);
        scaled.weight_means[0].set(r, 0, m / c);
        let lv = scaled.weight_log_variances[0].get(r, 0);
        scaled.weight_log_variances[0].set(r, 0, lv - 2.0 * c.ln());
    }
    let points: Vec<Vec<f64>> = (0..4).map(|_| vec![s.standard_normal(), s.standard_normal()]).collect();
    let scaled_points: Vec<Vec<f64>> = points.iter().map(|p| vec![p[0] * c, p[1]]).collect();
    let stream = RngStream::new(1, 2);
    let a = sensitivity_analysis(&points, &post, 6, 6, &stream).unwrap();
    let b = sensitivity_analysis(&scaled_points, &scaled, 6, 6, &stream).unwrap();
    for (ma, mb) in [
        (&a.values.expectation, &b.values.expectation),
        (&a.values.epistemic, &b.values.epistemic),
        (&a.values.aleatoric, &b.values.aleatoric),
    ] {
        assert!((mb.get(0, 0) - ma.get(0, 0) / c).abs() <= 1e-9 * ma.get(0, 0).max(1.0));
        assert!((mb.get(1, 0) - ma.get(1, 0)).abs() <= 1e-9 * ma.get(1, 0).max(1.0));
    }
}

#[test]
fn report_entries_are_non_negative() {
    let mut s = RngStream::new(12, 0);
    let post = random_posterior(NetworkArchitecture::two_hidden(3, 4, 2), 1, &mut s);
    let points: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| s.standard_normal()).collect()).collect();
    let r = sensitivity_analysis(&points, &post, 4, 4, &RngStream::new(0, 9)).unwrap();
    for m in [&r.values.expectation, &r.values.epistemic, &r.values.aleatoric] {
        assert!(m.as_slice().iter().all(|v| *v >= 0.0 && v.is_finite()));
    }
}

#[test]
fn empty_test_set_and_small_grids_rejected() {
    let post = random_posterior(NetworkArchitecture::two_hidden(1, 2, 1), 1, &mut RngStream::new(0, 0));
    assert!(sensitivity_analysis(&[], &post, 5, 5, &RngStream::new(0, 0)).is_err());
    assert!(point_gradients(&[0.0], &post, 1, 5, &RngStream::new(0, 0)).is_err());
    assert!(point_gradients(&[0.0], &post, 5, 1, &RngStream::new(0, 0)).is_err());
}

#[test]
fn classic_sensitivity_of_linear_net_is_weight_magnitude() {
    let arch = NetworkArchitecture::new(2, vec![], 1);
    let w = Matrix::from_rows(&[vec![-3.0, 0.5, 0.0, 1.0]]).unwrap();
    let post = VariationalPosterior::point_mass(arch, WeightSample::new(vec![w.clone()]), 1.0, &[1.0]).unwrap();
    let pts = vec![vec![1.0, 2.0], vec![-0.5, 0.0]];
    let c = classic_sensitivity(&pts, &post).unwrap();
    assert_eq!(c.get(0, 0), 3.0);
    assert_eq!(c.get(1, 0), 0.5);

    let mut shifted = w;
    shifted.set(0, 3, 10.0);
    let post2 = VariationalPosterior::point_mass(NetworkArchitecture::new(2, vec![], 1), WeightSample::new(vec![shifted]), 1.0, &[1.0]).unwrap();
    assert_eq!(classic_sensitivity(&pts, &post2).unwrap(), c);
}

#[test]
fn classic_sensitivity_matches_finite_differences() {
    let mut s = RngStream::new(21, 0);
    let h = 1e-5;
    for _ in 0..10 {
        let arch = random_architecture(&mut s, 3, 6, 2);
        let post = random_posterior(arch.clone(), 1, &mut s);
        let x: Vec<f64> = (0..arch.input_dim).map(|_| s.standard_normal()).collect();
        let c = classic_sensitivity(&[x.clone()], &post).unwrap();
        let f = |x: &[f64]| uncsens::model::forward(&arch, x, 0.0, &post.mean_weights()).unwrap();
        for i in 0..arch.input_dim {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let (fp, fm) = (f(&xp), f(&xm));
            for k in 0..arch.output_dim {
                let fd = ((fp[k] - fm[k]) / (2.0 * h)).abs();
                assert!((c.get(i, k) - fd).abs() <= 1e-5 * fd.max(1.0), "{} vs {fd}", c.get(i, k));
            }
        }
    }
}
