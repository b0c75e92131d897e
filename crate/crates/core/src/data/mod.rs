//! Datasets: CSV ingestion, standardization, seeded splits and the
//! heteroskedastic toy generator.

mod dataset;
mod manifest;
mod split;
mod standardize;
mod toy;

pub use dataset::{load_csv, load_features, write_csv, Dataset};
pub use manifest::DatasetManifest;
pub use split::{split, split_indices};
pub use standardize::Standardizer;
pub use toy::{generate_toy, generate_toy_with, ToyNoise, ToySample};
