//! Posterior consumer's risk (CR), producer's risk (PR) and acceptance
//! probability (AP) of a test plan, estimated by Monte Carlo over posterior
//! draws of θ.
//!
//! For each draw `j` the test outcome is `y ~ Poisson(μⱼ)` and the plan
//! passes when `y ≤ c`; with `Pⱼ = P(y ≤ c | θⱼ)` and field metric `mⱼ`:
//!
//! ```text
//! AP = (1/M) Σⱼ Pⱼ
//! CR = Σⱼ Pⱼ 1{mⱼ ≥ m₁} / Σⱼ Pⱼ
//! PR = Σⱼ (1 − Pⱼ) 1{mⱼ ≤ m₀} / Σⱼ (1 − Pⱼ)
//! ```
//!
//! A ratio whose denominator is zero is reported as 0 and flagged.
//!
//! HPP: `λ₀ⱼ = λ₀(τ_h; θⱼ)`, `μⱼ = x_t λ₀ⱼ n_t τ_t`, `mⱼ = x_d λ₀ⱼ`.
//!
//! NHPP: `μⱼ = n_t x_t [Λ₀(τ_h+τ_t) − Λ₀(τ_h)]`,
//! `mⱼ = x_d [Λ₀(τ_h+τ_d) − Λ₀(τ_h)] / τ_d`.

mod poisson;

pub use poisson::{poisson_cdf, poisson_pmf};

use serde::{Deserialize, Serialize};

use crate::bayes::PosteriorDraws;
use crate::error::{Error, Result};
use crate::model::{MileageAssumption, StudyWindows};

/// A candidate assurance test: `n_t` vehicles for `tau_t` days each, passed
/// when at most `c` events are observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    pub n_t: u32,
    pub tau_t: f64,
    pub c: u32,
}

impl TestPlan {
    pub fn new(n_t: u32, tau_t: f64, c: u32) -> Result<Self> {
        let plan = Self { n_t, tau_t, c };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::InvalidParameter("n_t must be >= 1".into()));
        }
        if !(self.tau_t.is_finite() && self.tau_t > 0.0) {
            return Err(Error::Domain {
                what: "tau_t",
                value: self.tau_t,
                expected: "finite, > 0",
            });
        }
        Ok(())
    }

    /// Total vehicle-days `τ = n_t · τ_t`.
    pub fn total_days(&self) -> f64 {
        f64::from(self.n_t) * self.tau_t
    }
}

/// Consumer's bound `m1` and producer's bound `m0` on the average
/// intensity (events/day); `(m0, m1)` is the indifference region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRequirement", into = "RawRequirement")]
pub struct ReliabilityRequirement {
    m0: f64,
    m1: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRequirement {
    m0: f64,
    m1: f64,
}

impl TryFrom<RawRequirement> for ReliabilityRequirement {
    type Error = Error;
    fn try_from(r: RawRequirement) -> Result<Self> {
        Self::new(r.m0, r.m1)
    }
}

impl From<ReliabilityRequirement> for RawRequirement {
    fn from(r: ReliabilityRequirement) -> Self {
        RawRequirement { m0: r.m0, m1: r.m1 }
    }
}

impl ReliabilityRequirement {
    pub fn new(m0: f64, m1: f64) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return Err(Error::Domain {
                what: "m0",
                value: m0,
                expected: "finite, > 0",
            });
        }
        if !(m1.is_finite() && m1 >= m0) {
            return Err(Error::Domain {
                what: "m1",
                value: m1,
                expected: "finite, >= m0",
            });
        }
        Ok(Self { m0, m1 })
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hpp,
    Nhpp,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Hpp => "hpp",
            ModelKind::Nhpp => "nhpp",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hpp" => Ok(ModelKind::Hpp),
            "nhpp" => Ok(ModelKind::Nhpp),
            other => Err(Error::InvalidParameter(format!(
                "unknown model `{other}` (expected hpp or nhpp)"
            ))),
        }
    }
}

/// Which risk ratio fell back to 0 because its denominator vanished.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateFlags {
    /// `Σ Pⱼ = 0`: the test can never pass.
    pub cr_denominator_zero: bool,
    /// `Σ (1 − Pⱼ) = 0`: the test can never fail.
    pub pr_denominator_zero: bool,
}

impl DegenerateFlags {
    pub fn any(&self) -> bool {
        self.cr_denominator_zero || self.pr_denominator_zero
    }
}

/// Monte Carlo standard errors; diagnostic only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskStdErrors {
    pub cr: f64,
    pub pr: f64,
    pub ap: f64,
}

/// CR, PR, AP and cost of one plan. Cost is `n_t · τ_t` for HPP and `τ_t`
/// for NHPP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub model: ModelKind,
    pub plan: TestPlan,
    pub cr: f64,
    pub pr: f64,
    pub ap: f64,
    pub cost: f64,
    pub degenerate: DegenerateFlags,
    pub std_error: RiskStdErrors,
}

/// Running sums for one `c`, accumulated in draw order.
#[derive(Debug, Clone, Copy, Default)]
struct RiskSums {
    pass: f64,
    pass_sq: f64,
    pass_bad: f64,
    pass_bad_sq: f64,
    fail: f64,
    fail_sq: f64,
    fail_good: f64,
    fail_good_sq: f64,
}

impl RiskSums {
    #[inline]
    fn add(&mut self, p: f64, bad: bool, good: bool) {
        let q = 1.0 - p;
        self.pass += p;
        self.pass_sq += p * p;
        self.fail += q;
        self.fail_sq += q * q;
        if bad {
            self.pass_bad += p;
            self.pass_bad_sq += p * p;
        }
        if good {
            self.fail_good += q;
            self.fail_good_sq += q * q;
        }
    }

    fn finish(&self, m: usize) -> (f64, f64, f64, DegenerateFlags, RiskStdErrors) {
        let mf = m as f64;
        let dof = (mf - 1.0).max(1.0);
        let ap = self.pass / mf;
        let mut flags = DegenerateFlags::default();

        // Ratio estimator R = Σa/Σb with a = b·1{·}: Σ(a − R b)² expands to
        // Σa²(1 − 2R) + R² Σb² because a·b = a² here.
        let ratio = |num: f64, den: f64, num_sq: f64, den_sq: f64| -> (f64, f64) {
            let r = (num / den).clamp(0.0, 1.0);
            let resid = (num_sq * (1.0 - 2.0 * r) + r * r * den_sq).max(0.0);
            let mean_b = den / mf;
            (r, (resid / (mf * dof)).sqrt() / mean_b)
        };

        let (cr, cr_se) = if self.pass > 0.0 {
            ratio(self.pass_bad, self.pass, self.pass_bad_sq, self.pass_sq)
        } else {
            flags.cr_denominator_zero = true;
            (0.0, 0.0)
        };
        let (pr, pr_se) = if self.fail > 0.0 {
            ratio(self.fail_good, self.fail, self.fail_good_sq, self.fail_sq)
        } else {
            flags.pr_denominator_zero = true;
            (0.0, 0.0)
        };
        let ap_var = ((self.pass_sq - mf * ap * ap) / dof).max(0.0);
        let se = RiskStdErrors {
            cr: cr_se,
            pr: pr_se,
            ap: (ap_var / mf).sqrt(),
        };
        (cr, pr, ap.clamp(0.0, 1.0), flags, se)
    }
}

/// Planning model and its time windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Hpp { tau_h: f64 },
    Nhpp { tau_h: f64, tau_d: f64 },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Hpp { .. } => ModelKind::Hpp,
            ModelSpec::Nhpp { .. } => ModelKind::Nhpp,
        }
    }
}

/// Everything besides the plan and the draws that the risks depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub spec: ModelSpec,
    pub requirement: ReliabilityRequirement,
    pub mileage: MileageAssumption,
}

impl Scenario {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    /// Expected test count `μⱼ` and field metric `mⱼ` per draw.
    fn draw_terms(&self, n_t: u32, tau_t: f64, draws: &PosteriorDraws) -> Result<Vec<(f64, f64)>> {
        if draws.is_empty() {
            return Err(Error::EmptyDraws);
        }
        let x = self.mileage;
        match self.spec {
            ModelSpec::Hpp { tau_h } => {
                if !(tau_h.is_finite() && tau_h > 0.0) {
                    return Err(Error::Domain {
                        what: "tau_h",
                        value: tau_h,
                        expected: "finite, > 0",
                    });
                }
                let tau = f64::from(n_t) * tau_t;
                let terms: Vec<(f64, f64)> = draws
                    .draws()
                    .iter()
                    .map(|th| {
                        let lambda0 = th.intensity(tau_h);
                        (x.x_t * lambda0 * tau, x.x_d * lambda0)
                    })
                    .collect();
                if terms.iter().all(|&(mu, _)| mu == 0.0) {
                    return Err(Error::Degenerate(format!(
                        "expected test count is 0 for every draw (n_t={n_t}, tau_t={tau_t}, x_t={})",
                        x.x_t
                    )));
                }
                Ok(terms)
            }
            ModelSpec::Nhpp { tau_h, tau_d } => {
                StudyWindows::new(tau_h, tau_t, tau_d)?;
                let nt = f64::from(n_t);
                Ok(draws
                    .draws()
                    .iter()
                    .map(|th| {
                        let d_test = th.increment(tau_h, tau_h + tau_t);
                        let d_demo = th.increment(tau_h, tau_h + tau_d);
                        (nt * x.x_t * d_test, x.x_d * d_demo / tau_d)
                    })
                    .collect())
            }
        }
    }

    fn cost(&self, plan: &TestPlan) -> f64 {
        match self.spec {
            ModelSpec::Hpp { .. } => plan.total_days(),
            ModelSpec::Nhpp { .. } => plan.tau_t,
        }
    }

    fn profile(&self, plan: TestPlan, sums: &RiskSums, m: usize) -> RiskProfile {
        let (cr, pr, ap, degenerate, std_error) = sums.finish(m);
        RiskProfile {
            model: self.kind(),
            plan,
            cr,
            pr,
            ap,
            cost: self.cost(&plan),
            degenerate,
            std_error,
        }
    }

    /// Risks of a single plan.
    pub fn evaluate(&self, plan: &TestPlan, draws: &PosteriorDraws) -> Result<RiskProfile> {
        let mut out = self.evaluate_thresholds(plan.n_t, plan.tau_t, &[plan.c], draws)?;
        Ok(out.remove(0))
    }

    /// Risks of the plans `(n_t, τ_t, c)` for every `c` in `cs`, sharing the
    /// per-draw work. Results follow the order of `cs`.
    pub fn evaluate_thresholds(
        &self,
        n_t: u32,
        tau_t: f64,
        cs: &[u32],
        draws: &PosteriorDraws,
    ) -> Result<Vec<RiskProfile>> {
        TestPlan::new(n_t, tau_t, 0)?;
        let terms = self.draw_terms(n_t, tau_t, draws)?;
        let Some(&c_max) = cs.iter().max() else {
            return Ok(Vec::new());
        };
        let req = self.requirement;
        let mut sums = vec![RiskSums::default(); c_max as usize + 1];
        for &(mu, metric) in &terms {
            let bad = metric >= req.m1;
            let good = metric <= req.m0;
            if mu > 0.0 {
                for (acc, p) in sums.iter_mut().zip(poisson::cumulative(mu)) {
                    acc.add(p, bad, good);
                }
            } else {
                for acc in sums.iter_mut() {
                    acc.add(1.0, bad, good);
                }
            }
        }
        Ok(cs
            .iter()
            .map(|&c| {
                let plan = TestPlan { n_t, tau_t, c };
                self.profile(plan, &sums[c as usize], terms.len())
            })
            .collect())
    }
}

/// Risks under the HPP model with the plateau rate `λ₀(τ_h; θ)`.
pub fn hpp_risks(
    plan: &TestPlan,
    draws: &PosteriorDraws,
    req: &ReliabilityRequirement,
    mileage: &MileageAssumption,
    tau_h: f64,
) -> Result<RiskProfile> {
    Scenario {
        spec: ModelSpec::Hpp { tau_h },
        requirement: *req,
        mileage: *mileage,
    }
    .evaluate(plan, draws)
}

/// Risks under the NHPP model; the demonstration window `τ_d` must cover the
/// test window `plan.tau_t`.
pub fn nhpp_risks(
    plan: &TestPlan,
    draws: &PosteriorDraws,
    tau_h: f64,
    tau_d: f64,
    req: &ReliabilityRequirement,
    mileage: &MileageAssumption,
) -> Result<RiskProfile> {
    Scenario {
        spec: ModelSpec::Nhpp { tau_h, tau_d },
        requirement: *req,
        mileage: *mileage,
    }
    .evaluate(plan, draws)
}

#[cfg(test)]
mod tests;
