//! Synthetic recurrent-events data from the mileage-adjusted growth model.
//!
//! Uses the time-transform method: the event count of a unit is Poisson with
//! mean `Λᵢ(τ_h)`, and each event time is the inverse CIF of a uniform draw
//! on `(0, Λᵢ(τ_h))`, found by bisection. Times are then recorded to day
//! resolution (`t ↦ ⌈t⌉`), matching the input CSV format, which keeps the
//! count in every whole-day window `(a, b]` exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::data::{MileageProfile, RecurrentDataset, UnitHistory};
use crate::error::{Error, Result};
use crate::model::WeibullGrowthParams;

const BISECTION_TOL_DAYS: f64 = 1e-10;

/// Per-unit RNG stream so results do not depend on thread scheduling.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse of a unit's CIF over run boundaries.
struct CifInverse<'a> {
    theta: &'a WeibullGrowthParams,
    runs: Vec<(f64, f64, f64, f64, f64)>, // (start, end, miles, Λ at start, Λ at end)
    total: f64,
}

impl<'a> CifInverse<'a> {
    fn new(theta: &'a WeibullGrowthParams, profile: &MileageProfile, horizon: f64) -> Self {
        let mut runs = Vec::new();
        let mut acc = 0.0;
        for r in profile.runs() {
            let start = r.start as f64;
            if start >= horizon {
                break;
            }
            let end = (r.end as f64).min(horizon);
            let next = acc + r.miles * theta.increment(start, end);
            runs.push((start, end, r.miles, acc, next));
            acc = next;
        }
        Self {
            theta,
            runs,
            total: acc,
        }
    }

    /// Smallest t with Λ(t) ≥ target, to within the bisection tolerance.
    fn invert(&self, target: f64) -> f64 {
        let i = self
            .runs
            .partition_point(|&(_, _, _, _, end_cum)| end_cum < target)
            .min(self.runs.len() - 1);
        let (start, end, miles, base, _) = self.runs[i];
        let f = |t: f64| base + miles * self.theta.increment(start, t) - target;
        let (mut lo, mut hi) = (start, end);
        while hi - lo > BISECTION_TOL_DAYS {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

fn simulate_unit(
    theta: &WeibullGrowthParams,
    profile: &MileageProfile,
    horizon_days: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let inv = CifInverse::new(theta, profile, horizon_days);
    if !(inv.total > 0.0) {
        return Vec::new();
    }
    let n = match Poisson::new(inv.total) {
        Ok(p) => p.sample(rng) as usize,
        Err(_) => 0,
    };
    let mut days: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            let t = inv.invert(u * inv.total);
            t.ceil().clamp(1.0, horizon_days.ceil())
        })
        .collect();
    days.sort_by(f64::total_cmp);
    days
}

/// Draws `n_units` independent units sharing one daily-mileage template.
///
/// Unit ids are `SIM0001`, `SIM0002`, … and unit `i` uses RNG stream `i`
/// of `seed`.
pub fn simulate_nhpp(
    theta: &WeibullGrowthParams,
    template: &MileageProfile,
    n_units: usize,
    horizon_days: f64,
    seed: u64,
) -> Result<RecurrentDataset> {
    if !(horizon_days.is_finite() && horizon_days > 0.0) {
        return Err(Error::Domain {
            what: "horizon_days",
            value: horizon_days,
            expected: "finite, > 0",
        });
    }
    if n_units == 0 {
        return Err(Error::InvalidParameter("n_units must be >= 1".into()));
    }
    let days = horizon_days.ceil() as usize;
    if template.days() != days {
        return Err(Error::Data(format!(
            "mileage template covers {} days, horizon needs {days}",
            template.days()
        )));
    }
    let units = (0..n_units)
        .into_par_iter()
        .map(|i| {
            let id = format!("SIM{:04}", i + 1);
            let mut rng = stream_rng(seed, i as u64);
            let events = simulate_unit(theta, template, horizon_days, &mut rng);
            UnitHistory::new(id.clone(), events, template.with_id(id))
        })
        .collect();
    RecurrentDataset::new(horizon_days, units)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cbif, cif};

    fn theta(a: f64, b: f64, c: f64) -> WeibullGrowthParams {
        WeibullGrowthParams::new(a, b, c).unwrap()
    }

    #[test]
    fn zero_mileage_gives_no_events() {
        let tpl = MileageProfile::constant("T", 0.0, 100).unwrap();
        let ds = simulate_nhpp(&theta(5.0, 0.1, 1.0), &tpl, 50, 100.0, 7).unwrap();
        assert_eq!(ds.total_events(), 0);
        assert_eq!(ds.units().len(), 50);
    }

    #[test]
    fn deterministic_for_seed() {
        let tpl = MileageProfile::constant("T", 0.3, 200).unwrap();
        let th = theta(20.0, 0.01, 1.1);
        let a = simulate_nhpp(&th, &tpl, 30, 200.0, 99).unwrap();
        let b = simulate_nhpp(&th, &tpl, 30, 200.0, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate_nhpp(&th, &tpl, 30, 200.0, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_input() {
        let tpl = MileageProfile::constant("T", 0.3, 10).unwrap();
        let th = theta(1.0, 1.0, 1.0);
        assert!(simulate_nhpp(&th, &tpl, 0, 10.0, 1).is_err());
        assert!(simulate_nhpp(&th, &tpl, 1, 11.0, 1).is_err());
        assert!(simulate_nhpp(&th, &tpl, 1, 0.0, 1).is_err());
    }

    #[test]
    fn inverse_cif_brackets_target() {
        let mut daily = vec![0.2; 50];
        daily.extend(vec![0.0; 30]);
        daily.extend(vec![0.5; 20]);
        let prof = MileageProfile::new("S", daily).unwrap();
        let th = theta(10.0, 0.02, 0.9);
        let inv = CifInverse::new(&th, &prof, 100.0);
        assert!((inv.total - cif(100.0, &prof, &th).unwrap()).abs() < 1e-12);
        for k in 1..50 {
            let target = inv.total * f64::from(k) / 50.0;
            let t = inv.invert(target);
            let at = cif(t, &prof, &th).unwrap();
            let before = cif((t - 1e-8).max(0.0), &prof, &th).unwrap();
            assert!(
                at >= target - 1e-9 && before <= target + 1e-9,
                "k={k} t={t}"
            );
            // never inside the zero-mileage gap unless exactly at its edge
            assert!(!(t > 50.0 + 1e-6 && t < 80.0 - 1e-6), "t={t}");
        }
    }

    #[test]
    fn mean_count_matches_cif() {
        // θ₃ = 1, constant mileage: E[N] = x θ₁ (1 − e^{−θ₂ τ}).
        let th = theta(3.0, 0.01, 1.0);
        let x = 0.5;
        let tau = 150.0;
        let tpl = MileageProfile::constant("T", x, 150).unwrap();
        let ds = simulate_nhpp(&th, &tpl, 10_000, tau, 2024).unwrap();
        let mean = x * 3.0 * (1.0 - (-0.01f64 * tau).exp());
        assert!((mean - x * cbif(tau, &th).unwrap()).abs() < 1e-12);
        let n = ds.units().len() as f64;
        let emp = ds.total_events() as f64 / n;
        let se = (mean / n).sqrt();
        assert!(
            (emp - mean).abs() < 3.0 * se,
            "emp {emp} mean {mean} se {se}"
        );
    }
}
