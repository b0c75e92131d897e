//! Fitting the variational posterior: a Monte-Carlo alpha-divergence energy
//! with reparameterized gradients, minimized by mini-batch Adam.

mod config;
mod energy;
mod train;

pub use config::TrainConfig;
pub use energy::{energy, energy_and_gradient, kl_gaussian, EnergyValue, Example};
pub use train::{train, write_training_log, EpochRecord, TrainOutcome};
