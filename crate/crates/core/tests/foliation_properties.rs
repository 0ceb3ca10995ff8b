use mdlab_core::coadjoint::indexed_rng;
use mdlab_core::foliation::{self, ActionSpec, FoliatedPoint, LeafInvariants, Stratum};
use proptest::prelude::*;

fn stratum_for(spec: ActionSpec) -> impl Strategy<Value = Stratum> {
    prop::sample::select(spec.strata().to_vec())
}

fn action() -> impl Strategy<Value = ActionSpec> {
    prop::sample::select(ActionSpec::ALL.to_vec())
}

proptest! {
    #[test]
    fn strata_are_invariant((spec, stratum) in action().prop_flat_map(|s| (Just(s), stratum_for(s))), seed in any::<u64>(), r in -5.0..5.0f64, a in -3.0..3.0f64) {
        let p = stratum.sample(&mut indexed_rng(seed, 0));
        prop_assert!(stratum.contains(&p));
        prop_assert!(stratum.contains(&foliation::act(spec, (r, a), &p)));
    }

    #[test]
    fn invariant_maps_are_constant_on_orbits(
        stratum in prop::sample::select(vec![Stratum::V1, Stratum::V2, Stratum::W2, Stratum::V3, Stratum::W3]),
        seed in any::<u64>(), r in -5.0..5.0f64, a in -3.0..3.0f64,
    ) {
        let spec = if matches!(stratum, Stratum::V3 | Stratum::W3) { ActionSpec::Lambda14 } else { ActionSpec::Lambda12 };
        let inv = LeafInvariants { stratum };
        let p = stratum.sample(&mut indexed_rng(seed, 0));
        let q = foliation::act(spec, (r, a), &p);
        prop_assert!(inv.eval(&p).max_abs_diff(&inv.eval(&q)) < 1e-9);
        prop_assert_eq!(inv.differential_rank(&p), inv.model_dim());
    }

    #[test]
    fn generators_commute(spec in action(), p in prop::array::uniform5(-3.0..3.0f64)) {
        let bracket = foliation::generator_bracket(spec, &FoliatedPoint(p));
        prop_assert!(bracket.iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn origin_is_outside_v() {
    assert!(FoliatedPoint::new(1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    assert!(FoliatedPoint::new(1.0, 0.0, 0.0, 0.0, 1e-3).is_ok());
}

#[test]
fn incompatible_pairs_are_rejected() {
    assert!(foliation::preservation_check(ActionSpec::Lambda14, Stratum::V1, 10, 0).is_err());
    assert!(foliation::leaf_invariants(Stratum::W1).is_err());
}

#[test]
fn reports_are_reproducible() {
    let a = foliation::leafspace_report(ActionSpec::Lambda12, 200, 4);
    let b = foliation::leafspace_report(ActionSpec::Lambda12, 200, 4);
    assert_eq!(a, b);
    assert!(a.iter().all(|c| c.passed(1e-9)));
    assert!(foliation::f1_fibration_check(200, 4).passed());
}
