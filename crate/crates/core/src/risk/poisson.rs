//! Poisson probabilities for the test-outcome model.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

// Above this mean e^{−μ} underflows in the direct recurrence.
const LOG_SPACE_MEAN: f64 = 500.0;

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() && mean > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "mean",
            value: mean,
            expected: "finite, > 0",
        })
    }
}

/// `h(y; μ) = μ^y e^{−μ} / y!`, evaluated in log space.
pub fn poisson_pmf(y: u64, mean: f64) -> Result<f64> {
    check_mean(mean)?;
    let y = y as f64;
    Ok((y * mean.ln() - mean - ln_gamma(y + 1.0)).exp())
}

/// `Σ_{y=0}^{c} h(y; μ)`.
pub fn poisson_cdf(c: u64, mean: f64) -> Result<f64> {
    check_mean(mean)?;
    Ok(cumulative(mean).nth(c as usize).unwrap_or(1.0))
}

/// Partial sums `P(Y ≤ 0), P(Y ≤ 1), …` for `Y ~ Poisson(mean)`.
///
/// Up to `⌊mean⌋` the lower sum is accumulated directly (in log space for
/// large means, where `e^{−μ}` underflows). Above it the value is
/// `1 − P(Y > y)` with the upper tail summed smallest-first; this keeps the
/// sequence monotone in both `y` and `mean` in the far tail, where adding
/// ever-smaller terms to a sum near 1 would only accumulate rounding.
///
/// Every CDF in the crate comes from this one sequence, so single-plan
/// and batched evaluations agree bit for bit.
pub(crate) fn cumulative(mean: f64) -> Cumulative {
    let split = mean.floor() as u64;
    let lower = if mean > LOG_SPACE_MEAN {
        Lower::Log {
            ln_mean: mean.ln(),
            ln_term: -mean,
            ln_sum: -mean,
        }
    } else {
        let t = (-mean).exp();
        Lower::Direct { term: t, sum: t }
    };
    Cumulative {
        y: 0,
        mean,
        split,
        lower,
        tail: Vec::new(),
    }
}

enum Lower {
    Direct {
        term: f64,
        sum: f64,
    },
    Log {
        ln_mean: f64,
        ln_term: f64,
        ln_sum: f64,
    },
}

pub(crate) struct Cumulative {
    y: u64,
    mean: f64,
    split: u64,
    lower: Lower,
    /// `P(Y > y)` for `y = split + 1, split + 2, …`, built on first use.
    tail: Vec<f64>,
}

// Upper-tail terms below this no longer change `1 − P(Y > y)`.
const TAIL_CUTOFF: f64 = 1e-20;

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl Cumulative {
    fn lower_value(&self) -> f64 {
        match self.lower {
            Lower::Direct { sum, .. } => sum,
            Lower::Log { ln_sum, .. } => ln_sum.exp(),
        }
    }

    fn advance_lower(&mut self) {
        let y = self.y as f64;
        match &mut self.lower {
            Lower::Direct { term, sum } => {
                *term *= self.mean / y;
                *sum += *term;
            }
            Lower::Log {
                ln_mean,
                ln_term,
                ln_sum,
            } => {
                *ln_term += *ln_mean - y.ln();
                *ln_sum = log_add_exp(*ln_sum, *ln_term);
            }
        }
    }

    fn build_tail(&mut self) {
        // Terms h(k) for k ≥ split + 2, then suffix sums from the far end.
        let mean = self.mean;
        let mut k = self.split + 2;
        let kf = k as f64;
        let mut term = (kf * mean.ln() - mean - ln_gamma(kf + 1.0)).exp();
        let mut terms = Vec::new();
        while term >= TAIL_CUTOFF || (k as f64) <= mean {
            terms.push(term);
            k += 1;
            term *= mean / k as f64;
        }
        let mut tail = vec![0.0; terms.len() + 1];
        let mut acc = 0.0;
        for (i, t) in terms.iter().enumerate().rev() {
            acc += t;
            tail[i] = acc;
        }
        self.tail = tail;
    }
}

impl Iterator for Cumulative {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let y = self.y;
        let out = if y <= self.split {
            let v = self.lower_value();
            self.y += 1;
            if self.y <= self.split {
                self.advance_lower();
            }
            v
        } else {
            if self.tail.is_empty() {
                self.build_tail();
            }
            let i = (y - self.split - 1) as usize;
            self.y += 1;
            1.0 - self.tail.get(i).copied().unwrap_or(0.0)
        };
        Some(out.min(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pmf_values() {
        assert!((poisson_pmf(0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(2, 2.0).unwrap() - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(2, 2.0).unwrap() - 0.270671).abs() < 1e-6);
        assert!(poisson_pmf(3, 0.0).is_err());
        assert!(poisson_pmf(3, -1.0).is_err());
        assert!(poisson_pmf(3, f64::NAN).is_err());
    }

    #[test]
    fn pmf_normalizes() {
        let s: f64 = (0..=500).map(|y| poisson_pmf(y, 50.0).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn pmf_large_arguments_stay_finite() {
        let v = poisson_pmf(10_000, 10_000.0).unwrap();
        let approx = 1.0 / (2.0 * std::f64::consts::PI * 10_000.0f64).sqrt();
        assert!((v / approx - 1.0).abs() < 1e-3);
    }

    #[test]
    fn cdf_values() {
        for mu in [0.1, 1.0, 7.5, 300.0] {
            assert!((poisson_cdf(0, mu).unwrap() - (-mu).exp()).abs() < 1e-15);
        }
        assert!((poisson_cdf(10_000, 5.0).unwrap() - 1.0).abs() < 1e-15);
        let by_pmf: f64 = (0..=10).map(|y| poisson_pmf(y, 5.0).unwrap()).sum();
        assert!((poisson_cdf(10, 5.0).unwrap() - by_pmf).abs() < 1e-14);
        assert!(poisson_cdf(1, 0.0).is_err());
    }

    #[test]
    fn log_space_branch_matches_pmf_sum() {
        // μ beyond the direct-recurrence range.
        let mu = 900.0;
        for c in [850u64, 900, 950] {
            let by_pmf: f64 = (0..=c).map(|y| poisson_pmf(y, mu).unwrap()).sum();
            let v = poisson_cdf(c, mu).unwrap();
            assert!((v - by_pmf).abs() < 1e-11, "c={c}: {v} vs {by_pmf}");
        }
        assert_eq!(poisson_cdf(0, 900.0).unwrap(), 0.0);
        assert!((poisson_cdf(5_000, 900.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_boundary_is_continuous() {
        let below = poisson_cdf(520, LOG_SPACE_MEAN).unwrap();
        let above = poisson_cdf(520, LOG_SPACE_MEAN.next_up()).unwrap();
        assert!((below - above).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn cdf_monotone(mu in 1e-3f64..800.0, dmu in 1e-3f64..50.0, c in 0u64..1200) {
            let a = poisson_cdf(c, mu).unwrap();
            let b = poisson_cdf(c, mu + dmu).unwrap();
            let a1 = poisson_cdf(c + 1, mu).unwrap();
            prop_assert!(b <= a);
            prop_assert!(a <= a1);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
