//! Plan grids, risk constraints, Pareto filtering and priority-based
//! selection.

mod pareto;

pub use pareto::{dominates, pareto_front, pareto_front_indices};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::PosteriorDraws;
use crate::error::{Error, Result};
use crate::risk::{RiskProfile, Scenario, TestPlan};

/// Test-days axis `min, min + step, …` up to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl DayRange {
    pub fn single(days: f64) -> Self {
        Self {
            min: days,
            max: days,
            step: 1.0,
        }
    }

    fn values(&self) -> Vec<f64> {
        // Each point is computed from `min` directly so integer grids stay exact.
        let span = (self.max - self.min) / self.step;
        let n = (span + 1e-9).floor() as u64;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

/// Candidate plans: every `n_t` × every `τ_t` × `c ∈ [0, c_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanGrid {
    pub n_t: Vec<u32>,
    pub tau_t: DayRange,
    pub c_max: u32,
}

impl PlanGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_t.is_empty() {
            return Err(Error::InvalidParameter("grid has no n_t values".into()));
        }
        if self.n_t.contains(&0) {
            return Err(Error::InvalidParameter(
                "grid n_t values must be >= 1".into(),
            ));
        }
        let r = self.tau_t;
        if !(r.min.is_finite() && r.min >= 1.0) {
            return Err(Error::Domain {
                what: "tau_t.min",
                value: r.min,
                expected: "finite, >= 1 day",
            });
        }
        if !(r.max.is_finite() && r.max >= r.min) {
            return Err(Error::Domain {
                what: "tau_t.max",
                value: r.max,
                expected: "finite, >= tau_t.min",
            });
        }
        if !(r.step.is_finite() && r.step > 0.0) {
            return Err(Error::Domain {
                what: "tau_t.step",
                value: r.step,
                expected: "finite, > 0",
            });
        }
        Ok(())
    }
}

/// Cartesian product of the grid axes, ordered by `n_t`, then `τ_t`, then `c`.
pub fn enumerate_plans(grid: &PlanGrid) -> Result<Vec<TestPlan>> {
    grid.validate()?;
    let taus = grid.tau_t.values();
    let mut plans = Vec::with_capacity(grid.n_t.len() * taus.len() * (grid.c_max as usize + 1));
    for &n_t in &grid.n_t {
        for &tau_t in &taus {
            for c in 0..=grid.c_max {
                plans.push(TestPlan::new(n_t, tau_t, c)?);
            }
        }
    }
    Ok(plans)
}

/// Risks for each plan, in input order. Plans sharing `(n_t, τ_t)` are
/// evaluated together; results do not depend on the thread schedule.
pub fn evaluate_grid(
    plans: &[TestPlan],
    draws: &PosteriorDraws,
    scenario: &Scenario,
) -> Result<Vec<RiskProfile>> {
    if plans.is_empty() {
        return Err(Error::InvalidParameter("no plans to evaluate".into()));
    }
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
    let mut groups: Vec<((u32, f64), Vec<usize>)> = Vec::new();
    let mut slot: HashMap<(u32, u64), usize> = HashMap::new();
    for (i, p) in plans.iter().enumerate() {
        let key = (p.n_t, p.tau_t.to_bits());
        let g = *slot.entry(key).or_insert_with(|| {
            groups.push(((p.n_t, p.tau_t), Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }

    let evaluated: Vec<Vec<RiskProfile>> = groups
        .par_iter()
        .map(|&((n_t, tau_t), ref idx)| {
            let cs: Vec<u32> = idx.iter().map(|&i| plans[i].c).collect();
            scenario
                .evaluate_thresholds(n_t, tau_t, &cs, draws)
                .map_err(|e| Error::Plan {
                    n_t,
                    tau_t,
                    c: cs[0],
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<Option<RiskProfile>> = vec![None; plans.len()];
    for ((_, idx), profiles) in groups.iter().zip(evaluated) {
        for (&i, p) in idx.iter().zip(profiles) {
            out[i] = Some(p);
        }
    }
    Ok(out
        .into_iter()
        .map(|p| p.expect("every plan evaluated"))
        .collect())
}

/// Upper bounds on consumer's risk and, optionally, producer's risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstraint", into = "RawConstraint")]
pub struct ConstraintSpec {
    alpha_c: f64,
    alpha_p: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawConstraint {
    alpha_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_p: Option<f64>,
}

impl TryFrom<RawConstraint> for ConstraintSpec {
    type Error = Error;
    fn try_from(r: RawConstraint) -> Result<Self> {
        Self::new(r.alpha_c, r.alpha_p)
    }
}

impl From<ConstraintSpec> for RawConstraint {
    fn from(c: ConstraintSpec) -> Self {
        RawConstraint {
            alpha_c: c.alpha_c,
            alpha_p: c.alpha_p,
        }
    }
}

impl ConstraintSpec {
    pub fn new(alpha_c: f64, alpha_p: Option<f64>) -> Result<Self> {
        let ok = |a: f64| a > 0.0 && a <= 1.0;
        if !ok(alpha_c) {
            return Err(Error::Domain {
                what: "alpha_c",
                value: alpha_c,
                expected: "in (0, 1]",
            });
        }
        if let Some(a) = alpha_p.filter(|&a| !ok(a)) {
            return Err(Error::Domain {
                what: "alpha_p",
                value: a,
                expected: "in (0, 1]",
            });
        }
        Ok(Self { alpha_c, alpha_p })
    }

    pub fn alpha_c(&self) -> f64 {
        self.alpha_c
    }

    pub fn alpha_p(&self) -> Option<f64> {
        self.alpha_p
    }

    /// `cr ≤ α_c` and, when set, `pr ≤ α_p`.
    pub fn admits(&self, p: &RiskProfile) -> bool {
        p.cr <= self.alpha_c && self.alpha_p.is_none_or(|a| p.pr <= a)
    }
}

/// Profiles meeting the constraints, in input order.
pub fn filter_constraints(profiles: &[RiskProfile], spec: &ConstraintSpec) -> Vec<RiskProfile> {
    profiles
        .iter()
        .filter(|p| spec.admits(p))
        .copied()
        .collect()
}

/// How to pick one plan from the front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "snake_case")]
pub enum PriorityRule {
    /// Among `pr ≤ t`: max AP, then min cost, then min `c`.
    MaxPrThreshold(f64),
    /// Among `ap ≥ t`: min cost, then min PR, then min `c`.
    MinApThreshold(f64),
    /// Among `cost ≤ t`: min PR, then max AP, then min `c`.
    MaxCostThreshold(f64),
}

impl PriorityRule {
    pub fn validate(&self) -> Result<()> {
        let (what, t, ok) = match *self {
            PriorityRule::MaxPrThreshold(t) => ("max_pr_threshold", t, (0.0..=1.0).contains(&t)),
            PriorityRule::MinApThreshold(t) => ("min_ap_threshold", t, (0.0..=1.0).contains(&t)),
            PriorityRule::MaxCostThreshold(t) => {
                ("max_cost_threshold", t, t.is_finite() && t > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                value: t,
                expected: "a probability in [0, 1] or a positive cost",
            })
        }
    }

    /// Human-readable statement of the rule and its tie-breaks.
    pub fn describe(&self) -> String {
        match *self {
            PriorityRule::MaxPrThreshold(t) => {
                format!("PR <= {t}: maximize AP, ties by lower cost then smaller c")
            }
            PriorityRule::MinApThreshold(t) => {
                format!("AP >= {t}: minimize cost, ties by lower PR then smaller c")
            }
            PriorityRule::MaxCostThreshold(t) => {
                format!("cost <= {t}: minimize PR, ties by higher AP then smaller c")
            }
        }
    }
}

/// The front member preferred by `rule`.
pub fn select_plan(front: &[RiskProfile], rule: &PriorityRule) -> Result<RiskProfile> {
    rule.validate()?;
    let c = |p: &RiskProfile| p.plan.c;
    let best = match *rule {
        PriorityRule::MaxPrThreshold(t) => front.iter().filter(|p| p.pr <= t).min_by(|a, b| {
            b.ap.total_cmp(&a.ap)
                .then(a.cost.total_cmp(&b.cost))
                .then(c(a).cmp(&c(b)))
        }),
        PriorityRule::MinApThreshold(t) => front.iter().filter(|p| p.ap >= t).min_by(|a, b| {
            a.cost
                .total_cmp(&b.cost)
                .then(a.pr.total_cmp(&b.pr))
                .then(c(a).cmp(&c(b)))
        }),
        PriorityRule::MaxCostThreshold(t) => front.iter().filter(|p| p.cost <= t).min_by(|a, b| {
            a.pr.total_cmp(&b.pr)
                .then(b.ap.total_cmp(&a.ap))
                .then(c(a).cmp(&c(b)))
        }),
    };
    best.copied().ok_or_else(|| {
        Error::NoFeasiblePlan(format!("no front member satisfies {}", rule.describe()))
    })
}

/// One row of the results table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRow {
    pub profile: RiskProfile,
    pub feasible: bool,
    pub on_front: bool,
}

/// Flags every profile as feasible and/or on the front of the feasible set.
pub fn classify(profiles: &[RiskProfile], spec: &ConstraintSpec) -> Vec<PlanRow> {
    let feasible_idx: Vec<usize> = (0..profiles.len())
        .filter(|&i| spec.admits(&profiles[i]))
        .collect();
    let feasible: Vec<RiskProfile> = feasible_idx.iter().map(|&i| profiles[i]).collect();
    let mut on_front = vec![false; profiles.len()];
    for k in pareto_front_indices(&feasible) {
        on_front[feasible_idx[k]] = true;
    }
    profiles
        .iter()
        .zip(on_front)
        .map(|(p, on_front)| PlanRow {
            profile: *p,
            feasible: spec.admits(p),
            on_front,
        })
        .collect()
}

pub const RESULTS_HEADER: [&str; 10] = [
    "model",
    "n_t",
    "tau_t",
    "c",
    "tau_total",
    "cr",
    "pr",
    "ap",
    "feasible",
    "on_front",
];

/// Results table as CSV with header [`RESULTS_HEADER`].
pub fn write_results_csv(rows: &[PlanRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Data(format!("writing results: {e}"));
    w.write_record(RESULTS_HEADER).map_err(io)?;
    for r in rows {
        let p = &r.profile;
        w.write_record([
            p.model.as_str().to_string(),
            p.plan.n_t.to_string(),
            p.plan.tau_t.to_string(),
            p.plan.c.to_string(),
            p.plan.total_days().to_string(),
            p.cr.to_string(),
            p.pr.to_string(),
            p.ap.to_string(),
            r.feasible.to_string(),
            r.on_front.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Data(format!("writing results: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}
