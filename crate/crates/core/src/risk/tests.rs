use super::*;
use crate::model::{bif, cbif, WeibullGrowthParams};
use proptest::prelude::*;

fn theta(a: f64, b: f64, c: f64) -> WeibullGrowthParams {
    WeibullGrowthParams::new(a, b, c).unwrap()
}

fn req(m0: f64, m1: f64) -> ReliabilityRequirement {
    ReliabilityRequirement::new(m0, m1).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn plan_and_requirement_validation() {
    assert!(TestPlan::new(0, 10.0, 1).is_err());
    assert!(TestPlan::new(1, 0.0, 1).is_err());
    assert!(TestPlan::new(1, f64::INFINITY, 1).is_err());
    assert_eq!(TestPlan::new(10, 20.0, 0).unwrap().total_days(), 200.0);
    assert!(ReliabilityRequirement::new(0.0, 0.1).is_err());
    assert!(ReliabilityRequirement::new(0.2, 0.1).is_err());
    assert!(ReliabilityRequirement::new(0.1, 0.1).is_ok());
    let bad: std::result::Result<ReliabilityRequirement, _> =
        serde_json::from_str(r#"{"m0":0.02,"m1":0.01}"#);
    assert!(bad.is_err());
}

#[test]
fn hpp_point_mass_mu_two() {
    // θ₃ = 1 gives λ₀(t) = θ₁θ₂ e^{−θ₂ t}; choose θ so x·λ₀·τ = 2.
    let th = theta(4.0, 0.5, 1.0);
    let tau_h = 2.0 * std::f64::consts::LN_2; // e^{−θ₂τ_h} = 1/2
    let lambda0 = bif(tau_h, &th).unwrap();
    assert!(close(lambda0, 1.0, 1e-14));
    let x = MileageAssumption::uniform(0.1).unwrap();
    let plan = TestPlan::new(4, 5.0, 2).unwrap(); // x·λ₀·τ = 0.1·1·20 = 2
    let r = hpp_risks(
        &plan,
        &PosteriorDraws::point_mass(th),
        &req(0.01, 0.05),
        &x,
        tau_h,
    )
    .unwrap();
    let ap = 5.0 * (-2.0f64).exp();
    assert!(close(r.ap, ap, 1e-12), "{}", r.ap);
    assert!(close(r.ap, 0.676676, 1e-6));
    assert_eq!(r.cr, 1.0);
    assert_eq!(r.pr, 0.0);
    assert_eq!(r.cost, 20.0);
    assert_eq!(r.model, ModelKind::Hpp);
    assert!(!r.degenerate.any());
}

#[test]
fn indifference_region_gives_zero_risks() {
    let th = theta(4.0, 0.5, 1.0);
    let tau_h = 2.0 * std::f64::consts::LN_2;
    let x = MileageAssumption::uniform(0.1).unwrap(); // field metric 0.1
    let d = PosteriorDraws::point_mass(th);
    for c in 0..6 {
        let plan = TestPlan::new(3, 7.0, c).unwrap();
        let r = hpp_risks(&plan, &d, &req(0.05, 0.2), &x, tau_h).unwrap();
        assert_eq!((r.cr, r.pr), (0.0, 0.0));
    }
}

#[test]
fn huge_c_saturates() {
    let th = theta(4.0, 0.5, 1.0);
    let x = MileageAssumption::uniform(0.1).unwrap();
    let plan = TestPlan::new(4, 5.0, 500).unwrap();
    let r = hpp_risks(
        &plan,
        &PosteriorDraws::point_mass(th),
        &req(0.5, 0.6),
        &x,
        1.0,
    )
    .unwrap();
    assert_eq!(r.ap, 1.0);
    assert_eq!(r.pr, 0.0);
    assert!(r.degenerate.pr_denominator_zero);
    assert!(!r.degenerate.cr_denominator_zero);
}

#[test]
fn hpp_zero_test_mileage_is_degenerate() {
    let x = MileageAssumption::new(0.0, 0.2).unwrap();
    let plan = TestPlan::new(1, 10.0, 0).unwrap();
    let d = PosteriorDraws::point_mass(theta(1.0, 0.1, 1.0));
    assert!(matches!(
        hpp_risks(&plan, &d, &req(0.01, 0.02), &x, 10.0),
        Err(Error::Degenerate(_))
    ));
    let x = MileageAssumption::uniform(0.2).unwrap();
    assert!(hpp_risks(&plan, &d, &req(0.01, 0.02), &x, 0.0).is_err());
}

#[test]
fn nhpp_saturated_cbif() {
    let th = theta(1.0, 1.0, 1.0);
    let x = MileageAssumption::uniform(0.2).unwrap();
    let plan = TestPlan::new(1, 365.0, 0).unwrap();
    let r = nhpp_risks(
        &plan,
        &PosteriorDraws::point_mass(th),
        1.0e4,
        730.0,
        &req(0.009, 0.0125),
        &x,
    )
    .unwrap();
    assert_eq!(r.ap, 1.0);
    assert_eq!(r.cr, 0.0);
    assert_eq!(r.pr, 0.0);
    assert!(r.degenerate.pr_denominator_zero);
    assert_eq!(r.cost, 365.0);
}

#[test]
fn nhpp_point_mass_mu_three() {
    // θ₃ = 1, θ₂ = ln 2 / 100: Λ₀(200) − Λ₀(100) = θ₁/4.
    let th = theta(60.0, std::f64::consts::LN_2 / 100.0, 1.0);
    let delta = cbif(200.0, &th).unwrap() - cbif(100.0, &th).unwrap();
    assert!(close(delta, 15.0, 1e-12));
    let x = MileageAssumption::uniform(0.1).unwrap();
    let plan = TestPlan::new(2, 100.0, 0).unwrap(); // μ = 2·0.1·15 = 3
    let m_d = 0.1 * (cbif(300.0, &th).unwrap() - cbif(100.0, &th).unwrap()) / 200.0;
    let d = PosteriorDraws::point_mass(th);
    for (m0, m1) in [(m_d / 2.0, m_d), (m_d, 2.0 * m_d), (m_d / 3.0, m_d / 2.0)] {
        let r = nhpp_risks(&plan, &d, 100.0, 200.0, &req(m0, m1), &x).unwrap();
        assert!(close(r.ap, (-3.0f64).exp(), 1e-12));
        assert!(close(r.ap, 0.049787, 1e-6));
        assert_eq!(r.cr, f64::from(u8::from(m_d >= m1)));
        assert_eq!(r.pr, f64::from(u8::from(m_d <= m0)));
    }
}

#[test]
fn nhpp_window_and_draw_errors() {
    let x = MileageAssumption::uniform(0.2).unwrap();
    let plan = TestPlan::new(1, 365.0, 0).unwrap();
    let d = PosteriorDraws::point_mass(theta(1.0, 0.01, 1.0));
    assert!(nhpp_risks(&plan, &d, 730.0, 100.0, &req(0.01, 0.02), &x).is_err());
    assert!(nhpp_risks(&plan, &d, -1.0, 730.0, &req(0.01, 0.02), &x).is_err());
}

#[test]
fn single_and_batched_paths_agree_exactly() {
    let draws = PosteriorDraws::new(
        (0..200)
            .map(|i| theta(100.0 + f64::from(i), 0.01, 0.7 + f64::from(i) * 1e-3))
            .collect(),
        "",
    )
    .unwrap();
    let x = MileageAssumption::uniform(0.21).unwrap();
    let scenarios = [
        ModelSpec::Hpp { tau_h: 730.0 },
        ModelSpec::Nhpp {
            tau_h: 730.0,
            tau_d: 730.0,
        },
    ];
    for spec in scenarios {
        let s = Scenario {
            spec,
            requirement: req(0.013, 0.016),
            mileage: x,
        };
        let cs: Vec<u32> = (0..=30).rev().collect();
        let batch = s.evaluate_thresholds(7, 90.0, &cs, &draws).unwrap();
        for (c, b) in cs.iter().zip(&batch) {
            let one = s
                .evaluate(&TestPlan::new(7, 90.0, *c).unwrap(), &draws)
                .unwrap();
            assert_eq!(&one, b);
        }
    }
}

#[test]
fn complement_identity() {
    let draws = PosteriorDraws::new(
        (0..101)
            .map(|i| theta(1.0 + f64::from(i) * 0.05, 0.02, 0.9))
            .collect(),
        "",
    )
    .unwrap();
    let x = MileageAssumption::uniform(0.3).unwrap();
    let rq = req(0.01, 0.012);
    let plan = TestPlan::new(3, 50.0, 2).unwrap();
    let r = hpp_risks(&plan, &draws, &rq, &x, 30.0).unwrap();
    let (mut pass, mut pass_good) = (0.0, 0.0);
    for th in draws.draws() {
        let l = bif(30.0, th).unwrap();
        let p = poisson_cdf(2, 0.3 * l * 150.0).unwrap();
        pass += p;
        if 0.3 * l < rq.m1() {
            pass_good += p;
        }
    }
    assert!(close(r.cr + pass_good / pass, 1.0, 1e-12));
}

#[test]
fn standard_errors_are_finite_and_vanish_for_point_mass() {
    let x = MileageAssumption::uniform(0.2).unwrap();
    let plan = TestPlan::new(2, 60.0, 1).unwrap();
    let r = hpp_risks(
        &plan,
        &PosteriorDraws::point_mass(theta(3.0, 0.01, 1.0)),
        &req(0.001, 0.002),
        &x,
        100.0,
    )
    .unwrap();
    assert_eq!(r.std_error.ap, 0.0);
    let draws = PosteriorDraws::new(
        (0..50)
            .map(|i| theta(1.0 + f64::from(i), 0.01, 1.0))
            .collect(),
        "",
    )
    .unwrap();
    let r = hpp_risks(&plan, &draws, &req(0.01, 0.05), &x, 100.0).unwrap();
    for v in [r.std_error.ap, r.std_error.cr, r.std_error.pr] {
        assert!(v.is_finite() && v >= 0.0);
    }
    assert!(r.std_error.ap > 0.0);
}

fn draws_strategy() -> impl Strategy<Value = PosteriorDraws> {
    proptest::collection::vec((0.1f64..300.0, 1e-4f64..0.01, 0.3f64..1.2), 1..20).prop_map(|v| {
        PosteriorDraws::new(v.into_iter().map(|(a, b, c)| theta(a, b, c)).collect(), "").unwrap()
    })
}

proptest! {
    #[test]
    fn probabilities_in_unit_interval(
        d in draws_strategy(), n_t in 1u32..12, tau_t in 1.0f64..400.0, c in 0u32..40,
        m0 in 1e-4f64..0.05, gap in 0.0f64..0.05, hpp in any::<bool>(),
    ) {
        let x = MileageAssumption::uniform(0.2).unwrap();
        let plan = TestPlan::new(n_t, tau_t, c).unwrap();
        let rq = req(m0, m0 + gap);
        let r = if hpp {
            hpp_risks(&plan, &d, &rq, &x, 730.0).unwrap()
        } else {
            nhpp_risks(&plan, &d, 730.0, tau_t.max(730.0), &rq, &x).unwrap()
        };
        for v in [r.cr, r.pr, r.ap] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn ap_monotone_in_c_and_test_size(
        d in draws_strategy(), n_t in 1u32..12, tau_t in 1.0f64..300.0, c in 0u32..40,
        grow in 1.0f64..50.0,
    ) {
        let x = MileageAssumption::uniform(0.2).unwrap();
        let rq = req(0.01, 0.02);
        let ap_h = |n, t, c| hpp_risks(&TestPlan::new(n, t, c).unwrap(), &d, &rq, &x, 730.0).unwrap().ap;
        let ap_n = |n, t, c| nhpp_risks(&TestPlan::new(n, t, c).unwrap(), &d, 730.0, 800.0, &rq, &x).unwrap().ap;
        prop_assert!(ap_h(n_t, tau_t, c) <= ap_h(n_t, tau_t, c + 1));
        prop_assert!(ap_h(n_t, tau_t + grow, c) <= ap_h(n_t, tau_t, c));
        prop_assert!(ap_h(n_t + 1, tau_t, c) <= ap_h(n_t, tau_t, c));
        prop_assert!(ap_n(n_t, tau_t, c) <= ap_n(n_t, tau_t, c + 1));
        prop_assert!(ap_n(n_t, tau_t + grow, c) <= ap_n(n_t, tau_t, c));
        prop_assert!(ap_n(n_t + 1, tau_t, c) <= ap_n(n_t, tau_t, c));
    }
}
