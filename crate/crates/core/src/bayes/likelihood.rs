use std::collections::BTreeMap;

use crate::bayes::NormalPrior;
use crate::data::RecurrentDataset;
use crate::model::{cif, WeibullGrowthParams};

/// Log of λ₀(t; θ) computed directly in log space.
#[inline]
fn ln_bif(t: f64, ln_t: f64, theta: &WeibullGrowthParams) -> f64 {
    let [a, b, c] = theta.as_array();
    a.ln() + b.ln() + c.ln() + (c - 1.0) * ln_t - b * t.powf(c)
}

/// Events that fall on a day with zero mileage. Each one makes the
/// likelihood zero for every θ.
pub fn zero_intensity_events(data: &RecurrentDataset) -> Vec<(String, f64)> {
    data.units()
        .iter()
        .flat_map(|u| {
            u.event_days()
                .iter()
                .filter(|&&t| u.mileage().at(t).is_none_or(|x| x == 0.0))
                .map(move |&t| (u.unit_id().to_string(), t))
        })
        .collect()
}

/// Log-likelihood of the recurrent-events data:
///
/// ```text
/// Σᵢ { Σⱼ log[xᵢ(tᵢⱼ) λ₀(tᵢⱼ; θ)] − Λᵢ(τ_h; θ) }
/// ```
///
/// Units without events contribute only `−Λᵢ(τ_h)`. An event on a
/// zero-mileage day yields `-inf`; see [`zero_intensity_events`].
pub fn log_likelihood(theta: &WeibullGrowthParams, data: &RecurrentDataset) -> f64 {
    let tau = data.horizon_days();
    let mut total = 0.0;
    for unit in data.units() {
        for &t in unit.event_days() {
            let x = unit.mileage().at(t).unwrap_or(0.0);
            if x == 0.0 {
                return f64::NEG_INFINITY;
            }
            total += x.ln() + ln_bif(t, t.ln(), theta);
        }
        // Horizon is validated against the profile at dataset construction.
        total -= cif(tau, unit.mileage(), theta).unwrap_or(f64::INFINITY);
    }
    total
}

/// Unnormalized log posterior; `-inf` when any component is not positive.
pub fn log_posterior(theta: &[f64; 3], data: &RecurrentDataset, prior: &NormalPrior) -> f64 {
    let Ok(params) = WeibullGrowthParams::new(theta[0], theta[1], theta[2]) else {
        return f64::NEG_INFINITY;
    };
    let lp = prior.log_density(theta);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    log_likelihood(&params, data) + lp
}

/// The likelihood reduced to sufficient pieces for repeated evaluation.
///
/// Event times are grouped by value and the cumulative terms of all units
/// are merged into one weighted sum of `Λ₀` over run boundaries, so each
/// evaluation costs O(distinct event days + distinct boundaries).
#[derive(Debug, Clone)]
pub struct CompiledLikelihood {
    n_events: f64,
    sum_ln_x: f64,
    sum_ln_t: f64,
    // (t, multiplicity)
    event_times: Vec<(f64, f64)>,
    // (boundary time, weight): Σᵢ Λᵢ(τ_h) = Σ_b w_b Λ₀(b)
    boundaries: Vec<(f64, f64)>,
    impossible: bool,
}

impl CompiledLikelihood {
    pub fn new(data: &RecurrentDataset) -> Self {
        let tau = data.horizon_days();
        let mut n = 0.0;
        let mut sum_ln_x = 0.0;
        let mut sum_ln_t = 0.0;
        let mut impossible = false;
        let mut times: BTreeMap<u64, f64> = BTreeMap::new();
        let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
        for unit in data.units() {
            for &t in unit.event_days() {
                let x = unit.mileage().at(t).unwrap_or(0.0);
                if x == 0.0 {
                    impossible = true;
                    continue;
                }
                n += 1.0;
                sum_ln_x += x.ln();
                sum_ln_t += t.ln();
                *times.entry(t.to_bits()).or_insert(0.0) += 1.0;
            }
            for run in unit.mileage().runs() {
                let start = run.start as f64;
                if start >= tau || run.miles == 0.0 {
                    continue;
                }
                let end = (run.end as f64).min(tau);
                *weights.entry(end.to_bits()).or_insert(0.0) += run.miles;
                *weights.entry(start.to_bits()).or_insert(0.0) -= run.miles;
            }
        }
        Self {
            n_events: n,
            sum_ln_x,
            sum_ln_t,
            event_times: times
                .into_iter()
                .map(|(bits, m)| (f64::from_bits(bits), m))
                .collect(),
            boundaries: weights
                .into_iter()
                .map(|(bits, w)| (f64::from_bits(bits), w))
                .filter(|&(_, w)| w != 0.0)
                .collect(),
            impossible,
        }
    }

    pub fn n_events(&self) -> usize {
        self.n_events as usize
    }

    pub fn eval(&self, theta: &WeibullGrowthParams) -> f64 {
        if self.impossible {
            return f64::NEG_INFINITY;
        }
        let [a, b, c] = theta.as_array();
        let mut power_sum = 0.0;
        for &(t, m) in &self.event_times {
            power_sum += m * t.powf(c);
        }
        let log_events =
            self.sum_ln_x + self.n_events * (a.ln() + b.ln() + c.ln()) + (c - 1.0) * self.sum_ln_t
                - b * power_sum;
        let mut cumulative = 0.0;
        for &(t, w) in &self.boundaries {
            cumulative += w * theta.cumulative(t);
        }
        log_events - cumulative
    }
}
