use super::Dataset;
use crate::error::{contract, Result};
use crate::math::RngStream;

const SPLIT_STREAM: u64 = 0x0053_504c_4954;

/// Seeded permutation of `0..n` cut into `(train, test)` index sets.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    contract!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train fraction must lie in (0, 1), got {train_fraction}"
    );
    let n_train = (n as f64 * train_fraction).round() as usize;
    contract!(
        n_train >= 1 && n_train < n,
        "a train fraction of {train_fraction} on {n} rows leaves one side empty"
    );
    let mut perm: Vec<usize> = (0..n).collect();
    let mut stream = RngStream::new(seed, SPLIT_STREAM);
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = ((stream.uniform() * (i + 1) as f64) as usize).min(i);
        perm.swap(i, j);
    }
    let test = perm.split_off(n_train);
    Ok((perm, test))
}

pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.len(), train_fraction, seed)?;
    Ok((dataset.select_rows(&train), dataset.select_rows(&test)))
}
