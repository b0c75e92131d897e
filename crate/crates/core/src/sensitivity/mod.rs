//! Input sensitivities of the predictive mean and of both uncertainty parts.
//!
//! For every test point the `N_w x N_z` random draws are frozen, which turns
//! the mean, epistemic-std and aleatoric-std estimators into deterministic
//! functions of the input. Their exact input gradients are accumulated one
//! weight draw at a time, so memory stays at `O(N_z * D * K)` per block.
//! The reported sensitivity of feature `i` for output `k` is the test-set
//! average of the absolute derivative.

mod gradients;
mod report;

pub use gradients::{classic_sensitivity, point_gradients, sensitivity_analysis, PointGradients, SQRT_GRAD_FLOOR};
pub use report::{SensitivityReport, SensitivityValues};
