use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Independent normal priors on θ₁, θ₂, θ₃, restricted to θ > 0.
///
/// The truncation constant is omitted from [`NormalPrior::log_density`]; it
/// does not depend on θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrior", into = "RawPrior")]
pub struct NormalPrior {
    mean: [f64; 3],
    sd: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct RawPrior {
    mean: [f64; 3],
    sd: [f64; 3],
}

impl TryFrom<RawPrior> for NormalPrior {
    type Error = Error;

    fn try_from(r: RawPrior) -> Result<Self> {
        Self::new(r.mean, r.sd)
    }
}

impl From<NormalPrior> for RawPrior {
    fn from(p: NormalPrior) -> Self {
        RawPrior {
            mean: p.mean,
            sd: p.sd,
        }
    }
}

impl Default for NormalPrior {
    /// Relatively flat: mean (1, 0.01, 1), sd (100, 10, 10).
    fn default() -> Self {
        Self {
            mean: [1.0, 0.01, 1.0],
            sd: [100.0, 10.0, 10.0],
        }
    }
}

impl NormalPrior {
    pub fn new(mean: [f64; 3], sd: [f64; 3]) -> Result<Self> {
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prior means must be finite, got {mean:?}"
            )));
        }
        if sd.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "prior sds must be finite and > 0, got {sd:?}"
            )));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> [f64; 3] {
        self.mean
    }

    pub fn sd(&self) -> [f64; 3] {
        self.sd
    }

    /// Sum of the three Gaussian log densities; `-inf` outside θ > 0.
    pub fn log_density(&self, theta: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for k in 0..3 {
            if !(theta[k] > 0.0) || !theta[k].is_finite() {
                return f64::NEG_INFINITY;
            }
            let z = (theta[k] - self.mean[k]) / self.sd[k];
            acc += -0.5 * z * z - self.sd[k].ln() - HALF_LN_2PI;
        }
        acc
    }
}
