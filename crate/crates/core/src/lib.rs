//! Bayesian neural networks with a latent input variable, the split of their
//! predictive variance into epistemic and aleatoric parts, and the input
//! sensitivity of each part.
//!
//! The model is a ReLU network `y = f(x, z; W) + eps` where `z ~ N(0, gamma)` is a
//! scalar latent input and `W` follows a mean-field Gaussian posterior. For a test
//! input the predictive variance is estimated from an `N_w x N_z` grid of forward
//! passes:
//!
//! * the spread over weight draws of the per-draw mean is the **epistemic** part,
//! * the mean over weight draws of the spread over latent draws is the **aleatoric** part.
//!
//! [`sensitivity`] differentiates those estimators with respect to every input
//! feature, holding the random draws fixed, and averages absolute derivatives over
//! a test set.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```bash
//! cargo run --release -p uncsens --example toy_data
//! cargo run --release -p uncsens --example decompose_uncertainty
//! cargo run --release -p uncsens --example train_model
//! cargo run --release -p uncsens --example toy_sensitivity
//! cargo run --release -p uncsens --example gradient_check
//! cargo run --release -p uncsens --example heteroskedastic_model
//! cargo run --release -p uncsens --example model_selection
//! cargo run --release -p uncsens --example experiment
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod harness;
pub mod math;
pub mod model;
pub mod sensitivity;
pub mod training;
pub mod uncertainty;

pub use data::{Dataset, Standardizer};
pub use error::{Error, Result};
pub use math::{AdamState, Matrix, RngStream};
pub use model::{GaussianLikelihood, NetworkArchitecture, SavedModel, VariationalPosterior, WeightSample};
pub use sensitivity::{PointGradients, SensitivityReport};
pub use training::{EnergyValue, TrainConfig};
pub use uncertainty::{PredictiveSampleGrid, UncertaintyDecomposition};

/// Version tag written into every JSON document this crate emits.
pub const FORMAT_VERSION: u32 = 1;
