//! Non-dominated filtering over (PR ↓, AP ↑, cost ↓).

use std::cmp::Ordering;

use crate::risk::RiskProfile;

/// `a` dominates `b`: no worse on PR, AP and cost, strictly better on at
/// least one. Comparisons are exact.
pub fn dominates(a: &RiskProfile, b: &RiskProfile) -> bool {
    let no_worse = a.pr <= b.pr && a.ap >= b.ap && a.cost <= b.cost;
    let better = a.pr < b.pr || a.ap > b.ap || a.cost < b.cost;
    no_worse && better
}

/// Indices of the non-dominated profiles, ordered by `c`, then cost, then
/// input position. Profiles tied on all three criteria are all kept.
pub fn pareto_front_indices(profiles: &[RiskProfile]) -> Vec<usize> {
    // Any dominator sorts strictly before what it dominates under
    // (cost ↑, pr ↑, ap ↓), and dominance is transitive, so each candidate
    // only needs checking against the front built so far.
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&profiles[i], &profiles[j]);
        a.cost
            .total_cmp(&b.cost)
            .then(a.pr.total_cmp(&b.pr))
            .then(b.ap.total_cmp(&a.ap))
            .then(i.cmp(&j))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let p = &profiles[i];
        if !front.iter().any(|&f| dominates(&profiles[f], p)) {
            front.push(i);
        }
    }
    front.sort_by(|&i, &j| by_c_then_cost(&profiles[i], &profiles[j]).then(i.cmp(&j)));
    front
}

/// The non-dominated profiles, ordered by `c` then cost.
pub fn pareto_front(profiles: &[RiskProfile]) -> Vec<RiskProfile> {
    pareto_front_indices(profiles)
        .into_iter()
        .map(|i| profiles[i])
        .collect()
}

fn by_c_then_cost(a: &RiskProfile, b: &RiskProfile) -> Ordering {
    a.plan.c.cmp(&b.plan.c).then(a.cost.total_cmp(&b.cost))
}
