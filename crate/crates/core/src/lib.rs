//! Planning reliability assurance tests from recurrent disengagement data.
//!
//! The pipeline: ingest (or simulate) per-unit event times and daily
//! mileage, fit a Bayesian Weibull reliability-growth model, evaluate the
//! posterior consumer's risk, producer's risk and acceptance probability of
//! candidate test plans under HPP or NHPP assumptions, and keep the
//! non-dominated plans.

pub mod bayes;
pub mod data;
pub mod error;
pub mod model;
pub mod planner;
pub mod risk;
pub mod simulate;

pub use error::{Error, Result};
