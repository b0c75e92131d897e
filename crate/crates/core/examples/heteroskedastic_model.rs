//! Plug a hand-written model into the estimators through `LatentModel`.
//!
//! For `f(x, z) = x * z` with `z ~ N(0, 1)` and no weight uncertainty the
//! aleatoric standard deviation is `|x|` times the spread of the latent draws,
//! its input gradient is `sign(x)` times that spread, and the epistemic part
//! vanishes.
//!
//! ```text
//! cargo run --release --example heteroskedastic_model
//! ```

use uncsens::math::RngStream;
use uncsens::sensitivity::point_gradients;
use uncsens::uncertainty::{latent_draws, LatentModel};

struct Product;

impl LatentModel for Product {
    type Weights = ();
    type Workspace = ();

    fn input_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn latent_prior_variance(&self) -> f64 {
        1.0
    }
    fn draw_weights(&self, _: &mut RngStream) {}
    fn workspace(&self) {}
    fn predict(&self, _: &mut (), _: &(), x: &[f64], z: f64, out: &mut [f64]) {
        out[0] = x[0] * z;
    }
    fn predict_with_jacobian(&self, _: &mut (), _: &(), x: &[f64], z: f64, out: &mut [f64], jac: &mut [f64]) {
        out[0] = x[0] * z;
        jac[0] = z;
    }
}

fn main() -> uncsens::Result<()> {
    let stream = RngStream::new(3, 0);
    let zs = latent_draws(&stream, 1.0, 200)?;
    let m = zs.iter().sum::<f64>() / zs.len() as f64;
    let spread = (zs.iter().map(|z| (z - m).powi(2)).sum::<f64>() / zs.len() as f64).sqrt();
    println!("spread of the 200 latent draws: {spread:.6}");
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "x", "aleatoric", "|x|*spread", "d/dx", "epistemic");
    for x in [-2.0, -0.5, 1.0, 3.0] {
        let g = point_gradients(&[x], &Product, 10, 200, &stream)?;
        println!(
            "{x:>6.1} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            g.values.aleatoric_std[0],
            x.abs() * spread,
            g.aleatoric_std.get(0, 0),
            g.values.epistemic_std[0]
        );
    }
    Ok(())
}
