//! The latent-input Bayesian network: architecture, weight draws, the
//! mean-field variational posterior and the Gaussian output likelihood.

mod architecture;
mod likelihood;
mod posterior;
mod saved;

pub use architecture::{forward, NetworkArchitecture, NetworkEvaluator, WeightSample};
pub use likelihood::{log_likelihood, GaussianLikelihood};
pub use posterior::{sample_latent_prior, VariationalPosterior, DEGENERATE_LOG_VARIANCE};
pub use saved::SavedModel;
