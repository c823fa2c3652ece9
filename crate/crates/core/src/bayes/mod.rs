//! Posterior inference for the growth-model parameters.
//!
//! The likelihood treats every unit as an independent NHPP with
//! mileage-adjusted intensity; the prior is a product of normals truncated
//! to the positive half-line. Sampling runs on `log θ` so the support
//! constraint is automatic.

mod draws;
mod likelihood;
mod mcmc;
mod prior;

pub use draws::{load_draws, save_draws, PosteriorDraws};
pub use likelihood::{log_likelihood, log_posterior, zero_intensity_events, CompiledLikelihood};
pub use mcmc::{fit_posterior, initial_point, split_rhat, McmcConfig, PosteriorFit};
pub use prior::NormalPrior;
