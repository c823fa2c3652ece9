//! Data round trip and a small fit-then-plan run through the public API.

use avplan_core::bayes::{fit_posterior, load_draws, save_draws, McmcConfig, NormalPrior};
use avplan_core::data::{parse_events, write_events_csv, write_mileage_csv, MileageProfile};
use avplan_core::model::{MileageAssumption, WeibullGrowthParams};
use avplan_core::planner::{
    classify, enumerate_plans, evaluate_grid, filter_constraints, pareto_front, select_plan,
    ConstraintSpec, DayRange, PlanGrid, PriorityRule,
};
use avplan_core::risk::{ModelSpec, ReliabilityRequirement, Scenario};
use avplan_core::simulate::simulate_nhpp;
use chrono::NaiveDate;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 12, 1).unwrap()
}

#[test]
fn simulated_data_round_trips_through_csv() {
    let th = WeibullGrowthParams::new(30.0, 0.01, 0.9).unwrap();
    let template = MileageProfile::constant("T", 0.2, 730).unwrap();
    let ds = simulate_nhpp(&th, &template, 15, 730.0, 3).unwrap();
    let events = write_events_csv(&ds, start()).unwrap();
    let mileage = write_mileage_csv(&ds, start()).unwrap();
    let back = parse_events(&events, &mileage, start(), 730.0).unwrap();
    assert_eq!(back, ds);
    assert_eq!(write_events_csv(&back, start()).unwrap(), events);
}

#[test]
fn fit_then_plan() {
    let th = WeibullGrowthParams::new(230.0, 0.01, 0.8).unwrap();
    let template = MileageProfile::constant("T", 0.21, 730).unwrap();
    let ds = simulate_nhpp(&th, &template, 10, 730.0, 5).unwrap();
    let fit = fit_posterior(&ds, &NormalPrior::default(), 401, 5, &McmcConfig::default()).unwrap();
    let draws = load_draws(&save_draws(&fit.draws)).unwrap();
    assert_eq!(draws.len(), 401);

    let grid = PlanGrid {
        n_t: vec![10],
        tau_t: DayRange {
            min: 20.0,
            max: 120.0,
            step: 5.0,
        },
        c_max: 15,
    };
    let plans = enumerate_plans(&grid).unwrap();
    let scenario = Scenario {
        spec: ModelSpec::Hpp { tau_h: 730.0 },
        requirement: ReliabilityRequirement::new(0.013, 0.016).unwrap(),
        mileage: MileageAssumption::uniform(0.21).unwrap(),
    };
    let profiles = evaluate_grid(&plans, &draws, &scenario).unwrap();
    assert_eq!(profiles.len(), plans.len());
    let spec = ConstraintSpec::new(0.2, None).unwrap();
    let front = pareto_front(&filter_constraints(&profiles, &spec));
    assert!(!front.is_empty());
    let rows = classify(&profiles, &spec);
    assert_eq!(rows.iter().filter(|r| r.on_front).count(), front.len());
    assert!(rows.iter().all(|r| !r.on_front || r.feasible));
    let cheapest = select_plan(&front, &PriorityRule::MinApThreshold(0.0)).unwrap();
    assert!(front.iter().all(|p| p.cost >= cheapest.cost));
}
