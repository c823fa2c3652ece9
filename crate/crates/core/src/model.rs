//! Weibull reliability-growth intensity model.
//!
//! Baseline intensity (BIF) and its cumulative form (CBIF):
//!
//! ```text
//! λ₀(t; θ) = θ₁ θ₂ θ₃ t^(θ₃−1) exp(−θ₂ t^θ₃)
//! Λ₀(t; θ) = θ₁ [1 − exp(−θ₂ t^θ₃)]
//! ```
//!
//! The mileage effect is multiplicative, `λᵢ(t) = λ₀(t; θ) · xᵢ(t)`, so the
//! cumulative intensity of a unit is `∫₀ᵗ λ₀(s; θ) xᵢ(s) ds`.
//!
//! Units are fixed throughout the crate: time in days, mileage in
//! k-miles/day, intensities in events/day.

use serde::{Deserialize, Serialize};

use crate::data::MileageProfile;
use crate::error::{Error, Result};

/// Parameter vector θ = (θ₁, θ₂, θ₃) of the Weibull growth model.
///
/// θ₁ is the asymptotic expected baseline event count, θ₂ is scale-like and
/// θ₃ is shape-like. All three are strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct WeibullGrowthParams {
    theta1: f64,
    theta2: f64,
    theta3: f64,
}

impl WeibullGrowthParams {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        for (name, v) in [("theta1", theta1), ("theta2", theta2), ("theta3", theta3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(Self {
            theta1,
            theta2,
            theta3,
        })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn theta3(&self) -> f64 {
        self.theta3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    /// λ₀(t) for `t > 0` (or `t == 0` with θ₃ ≥ 1). Callers check the domain.
    #[inline]
    pub(crate) fn intensity(&self, t: f64) -> f64 {
        let tp = t.powf(self.theta3);
        let pre = self.theta1 * self.theta2 * self.theta3;
        if self.theta3 == 1.0 {
            return pre * (-self.theta2 * t).exp();
        }
        // t^(θ₃−1) written as t^θ₃ / t keeps a single powf for t > 0.
        let shape = if t > 0.0 {
            tp / t
        } else {
            t.powf(self.theta3 - 1.0)
        };
        pre * shape * (-self.theta2 * tp).exp()
    }

    /// Λ₀(t) for `t ≥ 0`.
    #[inline]
    pub(crate) fn cumulative(&self, t: f64) -> f64 {
        -self.theta1 * (-self.theta2 * t.powf(self.theta3)).exp_m1()
    }

    /// Λ₀(t) − Λ₀(s) for `0 ≤ s ≤ t`, factored as
    /// `θ₁ e^{−θ₂s^θ₃} (1 − e^{−θ₂(t^θ₃ − s^θ₃)})` so it keeps full relative
    /// precision once Λ₀ has saturated.
    #[inline]
    pub(crate) fn increment(&self, s: f64, t: f64) -> f64 {
        let a = self.theta2 * s.powf(self.theta3);
        let b = self.theta2 * t.powf(self.theta3);
        -self.theta1 * (-a).exp() * (a - b).exp_m1()
    }
}

impl TryFrom<[f64; 3]> for WeibullGrowthParams {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<WeibullGrowthParams> for [f64; 3] {
    fn from(p: WeibullGrowthParams) -> Self {
        p.as_array()
    }
}

/// Historical, test and demonstration window lengths in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyWindows {
    pub tau_h: f64,
    pub tau_t: f64,
    pub tau_d: f64,
}

impl StudyWindows {
    pub fn new(tau_h: f64, tau_t: f64, tau_d: f64) -> Result<Self> {
        if !(tau_h.is_finite() && tau_h >= 0.0) {
            return Err(Error::Domain {
                what: "tau_h",
                value: tau_h,
                expected: "finite, >= 0",
            });
        }
        if !(tau_t.is_finite() && tau_t > 0.0) {
            return Err(Error::Domain {
                what: "tau_t",
                value: tau_t,
                expected: "finite, > 0",
            });
        }
        if !(tau_d.is_finite() && tau_d >= tau_t) {
            return Err(Error::Domain {
                what: "tau_d",
                value: tau_d,
                expected: "finite, >= tau_t",
            });
        }
        Ok(Self {
            tau_h,
            tau_t,
            tau_d,
        })
    }
}

/// Daily mileage (k-miles/day) during the test and in field use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MileageAssumption {
    pub x_t: f64,
    pub x_d: f64,
}

impl MileageAssumption {
    pub fn new(x_t: f64, x_d: f64) -> Result<Self> {
        for (what, v) in [("x_t", x_t), ("x_d", x_d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain {
                    what,
                    value: v,
                    expected: "finite, >= 0",
                });
            }
        }
        Ok(Self { x_t, x_d })
    }

    /// Same daily mileage in testing and in the field.
    pub fn uniform(x: f64) -> Result<Self> {
        Self::new(x, x)
    }
}

/// Baseline intensity λ₀(t; θ).
///
/// `t` must be positive; `t == 0` is accepted only when θ₃ ≥ 1, where the
/// intensity is finite.
pub fn bif(t: f64, theta: &WeibullGrowthParams) -> Result<f64> {
    if !t.is_finite() || t < 0.0 || (t == 0.0 && theta.theta3 < 1.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            expected: "t > 0 (t = 0 allowed only for theta3 >= 1)",
        });
    }
    Ok(theta.intensity(t))
}

/// Cumulative baseline intensity Λ₀(t; θ), with Λ₀(0) = 0 and limit θ₁.
pub fn cbif(t: f64, theta: &WeibullGrowthParams) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            what: "t",
            value: t,
            expected: "finite, >= 0",
        });
    }
    Ok(theta.cumulative(t))
}

/// Cumulative intensity of one unit at time `t` under its daily mileage.
///
/// Mileage is constant within each day, so the integral is evaluated
/// exactly as a sum of CBIF increments over runs of equal daily mileage.
pub fn cif(t: f64, profile: &MileageProfile, theta: &WeibullGrowthParams) -> Result<f64> {
    let horizon = profile.days() as f64;
    if !t.is_finite() || t < 0.0 || t > horizon {
        return Err(Error::Domain {
            what: "t",
            value: t,
            expected: "within [0, profile horizon]",
        });
    }
    Ok(cif_unchecked(t, profile, theta))
}

pub(crate) fn cif_unchecked(t: f64, profile: &MileageProfile, theta: &WeibullGrowthParams) -> f64 {
    let mut total = 0.0;
    for run in profile.runs() {
        let start = run.start as f64;
        if start >= t {
            break;
        }
        if run.miles == 0.0 {
            continue;
        }
        let end = (run.end as f64).min(t);
        total += run.miles * theta.increment(start, end);
    }
    total
}

/// Average intensity `m(s, t) = x [Λ₀(t) − Λ₀(s)] / (t − s)` under constant
/// daily mileage `x`, in events/day.
pub fn avg_intensity(s: f64, t: f64, x: f64, theta: &WeibullGrowthParams) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain {
            what: "s",
            value: s,
            expected: "finite, >= 0",
        });
    }
    if !(t.is_finite() && t > s) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            expected: "finite, > s",
        });
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain {
            what: "x",
            value: x,
            expected: "finite, >= 0",
        });
    }
    Ok(x * theta.increment(s, t) / (t - s))
}

/// Constant event rate used by the HPP planning model: the growth intensity
/// frozen at the end of the historical period, scaled by daily mileage.
pub fn hpp_rate(theta: &WeibullGrowthParams, tau_h: f64, x: f64) -> Result<f64> {
    if !(tau_h.is_finite() && tau_h > 0.0) {
        return Err(Error::Domain {
            what: "tau_h",
            value: tau_h,
            expected: "finite, > 0",
        });
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain {
            what: "x",
            value: x,
            expected: "finite, >= 0",
        });
    }
    Ok(x * theta.intensity(tau_h))
}
