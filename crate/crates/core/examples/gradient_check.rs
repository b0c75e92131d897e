//! Compare the reverse-mode input gradients of the three estimators with
//! central finite differences on a random network, using the same draws for
//! every evaluation.
//!
//! ```text
//! cargo run --release --example gradient_check -- [seed]
//! ```

use uncsens::math::RngStream;
use uncsens::sensitivity::point_gradients;
use uncsens::{NetworkArchitecture, VariationalPosterior};

fn main() -> uncsens::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(7, |s| s.parse().expect("seed"));
    let arch = NetworkArchitecture::two_hidden(3, 8, 1);
    let mut init = RngStream::new(seed, 0);
    let mut posterior = VariationalPosterior::initialize(arch, 1, 1.0, &mut init)?;
    // Widen the weight posterior so that the epistemic part is visible.
    for lv in &mut posterior.weight_log_variances {
        lv.as_mut_slice().fill((0.05f64).ln());
    }

    let x = [0.3, -1.2, 0.8];
    let (n_w, n_z) = (20, 20);
    let stream = RngStream::new(seed, 1);
    let g = point_gradients(&x, &posterior, n_w, n_z, &stream)?;
    let h = 1e-5;

    println!("{:>8} {:>12} {:>16} {:>16} {:>10}", "feature", "estimator", "reverse mode", "finite diff", "rel err");
    for i in 0..x.len() {
        let at = |step: f64| {
            let mut xs = x;
            xs[i] += step;
            point_gradients(&xs, &posterior, n_w, n_z, &stream).map(|p| p.values)
        };
        let (up, down) = (at(h)?, at(-h)?);
        let rows = [
            ("mean", g.expectation.get(i, 0), up.expectation[0] - down.expectation[0]),
            ("epistemic", g.epistemic_std.get(i, 0), up.epistemic_std[0] - down.epistemic_std[0]),
            ("aleatoric", g.aleatoric_std.get(i, 0), up.aleatoric_std[0] - down.aleatoric_std[0]),
        ];
        for (name, analytic, diff) in rows {
            let fd = diff / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1.0);
            println!("{:>8} {name:>12} {analytic:>16.9} {fd:>16.9} {rel:>10.1e}", format!("x{}", i + 1));
        }
    }
    Ok(())
}
