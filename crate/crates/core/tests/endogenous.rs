use netcontest::endogenous::{aggregate_contest, endogenous_equilibrium, verify_endogenous, RHO_BOUND};
use netcontest::{effective_efforts, payoffs};
use proptest::prelude::*;

#[test]
fn out_star_profiles_pass_every_check() {
    let values = vec![1.0; 8];
    for (c1, c2) in [(1.0, 1.0), (1.0, 2.0)] {
        for gamma in [1.0, 0.5] {
            let p = endogenous_equilibrium(&values, c1, c2, gamma, 0, 0).unwrap();
            let report = verify_endogenous(&p, &values, c1, c2, gamma).unwrap();
            assert!(report.passed(), "{report}");
            let agg = aggregate_contest(c1, c2, gamma, 8.0).unwrap();
            let direct = payoffs(&p.game(&values, c1, c2, gamma), &p.profile()).unwrap();
            for (d, a) in direct.iter().zip(agg.payoffs) {
                assert!((d - a).abs() <= 1e-12 * 8.0);
            }
        }
    }
}

#[test]
fn weakened_out_star_loses_universal_access() {
    let values = vec![1.0; 8];
    let mut p = endogenous_equilibrium(&values, 1.0, 2.0, 1.0, 0, 0).unwrap();
    p.rho1.set(0, 5, 0.9);
    let report = verify_endogenous(&p, &values, 1.0, 2.0, 1.0).unwrap();
    let access = report.get("universal access 1").unwrap();
    assert!(!access.passed);
    assert!(access.detail.contains("[6]"), "{}", access.detail);
    assert!(report.get("universal access 2").unwrap().passed);
}

#[test]
fn links_above_the_bound_are_flagged() {
    let values = vec![1.0; 3];
    let mut p = endogenous_equilibrium(&values, 1.0, 1.0, 1.0, 0, 1).unwrap();
    p.rho2.set(1, 0, RHO_BOUND + 0.5);
    let report = verify_endogenous(&p, &values, 1.0, 1.0, 1.0).unwrap();
    assert!(!report.get("bounded links 2").unwrap().passed);
}

#[test]
fn misplaced_effort_is_caught() {
    let values = vec![1.0, 2.0, 3.0];
    let mut p = endogenous_equilibrium(&values, 1.0, 2.0, 1.0, 0, 0).unwrap();
    p.e1[0] *= 1.5;
    let report = verify_endogenous(&p, &values, 1.0, 2.0, 1.0).unwrap();
    assert!(!report.get("aggregate effort 1").unwrap().passed);
    assert!(!report.passed());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn outcome_does_not_depend_on_hubs(
        values in prop::collection::vec(0.5f64..3.0, 2..=6),
        c1 in 0.5f64..2.0,
        c2 in 0.5f64..2.0,
        gamma in prop::sample::select(vec![0.5, 0.8, 1.0]),
        h in any::<prop::sample::Index>(),
    ) {
        let m = values.len();
        let a = endogenous_equilibrium(&values, c1, c2, gamma, 0, 0).unwrap();
        let b = endogenous_equilibrium(&values, c1, c2, gamma, h.index(m), m - 1 - h.index(m)).unwrap();
        let (ga, gb) = (a.game(&values, c1, c2, gamma), b.game(&values, c1, c2, gamma));
        let ya = effective_efforts(&ga, &a.profile()).unwrap();
        let yb = effective_efforts(&gb, &b.profile()).unwrap();
        for k in 0..m {
            prop_assert!((ya.y1[k] - yb.y1[k]).abs() < 1e-12);
            prop_assert!((ya.y2[k] - yb.y2[k]).abs() < 1e-12);
        }
        let pa = payoffs(&ga, &a.profile()).unwrap();
        let pb = payoffs(&gb, &b.profile()).unwrap();
        prop_assert!((pa[0] - pb[0]).abs() < 1e-12 && (pa[1] - pb[1]).abs() < 1e-12);
        let report = verify_endogenous(&b, &values, c1, c2, gamma).unwrap();
        prop_assert!(report.passed(), "{}", report);
    }
}
