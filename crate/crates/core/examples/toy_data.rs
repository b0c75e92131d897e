//! Generate the two-feature toy dataset and summarize it.
//!
//! `x1` follows a shifted exponential, `x2` is uniform on `[-4, 4]` and the
//! noise amplitude of `y` depends only on `x2`.
//!
//! ```text
//! cargo run --release --example toy_data -- [n] [seed] [out.csv]
//! ```

use uncsens::data::{generate_toy_with, write_csv, ToyNoise};

fn main() -> uncsens::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(500, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let out = args.next();

    let sample = generate_toy_with(n, seed, ToyNoise::Gaussian);
    let data = &sample.dataset;
    let column = |j: usize| -> Vec<f64> { (0..data.len()).map(|i| data.features.get(i, j)).collect() };
    let (x1, x2) = (column(0), column(1));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));

    println!("{n} points, seed {seed}");
    println!("x1 mean {:.3} (population value -2), range {:?}", mean(&x1), range(&x1));
    println!("x2 mean {:.3} (population value 0), range {:?}", mean(&x2), range(&x2));

    // The residual around 7 sin(x1) is the noise term 3 |cos(x2 / 2)| eps.
    let mut quiet = Vec::new();
    let mut loud = Vec::new();
    for i in 0..data.len() {
        let r = data.y(i)[0] - 7.0 * x1[i].sin();
        if x2[i].abs() > 3.0 { quiet.push(r * r) } else if x2[i].abs() < 1.0 { loud.push(r * r) }
    }
    println!(
        "residual variance for |x2| < 1: {:.2}, for |x2| > 3: {:.2}",
        mean(&loud),
        mean(&quiet)
    );

    if let Some(path) = out {
        write_csv(data, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
