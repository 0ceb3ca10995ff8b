use mdlab_core::coadjoint::{self, indexed_rng, Covector, OrbitStratum};
use mdlab_core::lie::{build_md5, FamilyId, Md5Family};
use proptest::prelude::*;

fn family_strategy() -> impl Strategy<Value = Md5Family> {
    (1u8..=14, any::<u64>())
        .prop_map(|(i, seed)| FamilyId::new(i).unwrap().sample(&mut indexed_rng(seed, 1)))
}

fn covector() -> impl Strategy<Value = Covector> {
    prop::array::uniform5(-2.0..2.0f64).prop_map(Covector)
}

proptest! {
    #[test]
    fn orbit_dimension_is_zero_or_two(family in family_strategy(), f in covector()) {
        let alg = build_md5(family).unwrap();
        let dim = coadjoint::orbit_dimension(&alg, &f);
        prop_assert!(dim == 0 || dim == 2);
        prop_assert_eq!(dim, coadjoint::predicted_stratum(&family, &f).dimension());
    }

    #[test]
    fn orbit_dimension_is_constant_along_the_flow(family in family_strategy(), f in covector(), a in -2.0..2.0f64) {
        let alg = build_md5(family).unwrap();
        let g = coadjoint::coadjoint_flow(&alg, &f, a, f.alpha() + 0.5);
        prop_assert_eq!(coadjoint::orbit_dimension(&alg, &f), coadjoint::orbit_dimension(&alg, &g));
    }

    #[test]
    fn flow_is_a_one_parameter_group(family in family_strategy(), f in covector(), a in -1.5..1.5f64, b in -1.5..1.5f64) {
        let alg = build_md5(family).unwrap();
        prop_assert!(coadjoint::flow_group_law_residual(&alg, &f, a, b) < 1e-10);
    }

    #[test]
    fn pade_and_block_flows_agree(family in family_strategy(), f in covector(), a in -3.0..3.0f64) {
        let alg = build_md5(family).unwrap();
        let pade = coadjoint::coadjoint_flow(&alg, &f, a, 0.0);
        let blocks = coadjoint::coadjoint_flow_blocks(&family, &f, a, 0.0);
        prop_assert!(pade.max_abs_diff(&blocks) < 1e-10 * (1.0 + pade.to_vector().amax()));
    }

    #[test]
    fn closed_forms_match_the_flow(family in family_strategy(), f in covector(), x in -2.0..2.0f64) {
        let grid = coadjoint::a_grid(-3.0, 3.0, 25, x);
        prop_assert!(coadjoint::flow_vs_closed_form(&family, &f, &grid) < 1e-9);
    }

    #[test]
    fn closed_form_orbits_are_tangent_to_the_kirillov_image(family in family_strategy(), f in covector()) {
        let alg = build_md5(family).unwrap();
        prop_assume!(coadjoint::orbit_dimension(&alg, &f) == 2);
        prop_assert!(coadjoint::orbit_tangent_residual(&family, &f) < 1e-6);
    }
}

#[test]
fn zero_stratum_is_fixed() {
    for id in FamilyId::ALL {
        let family = id.sample(&mut indexed_rng(5, id.index() as u64));
        let f = Covector::new(0.7, 0.0, 0.0, 0.0, 0.0);
        let desc = coadjoint::closed_form_orbit(family, f);
        assert_eq!(desc.stratum, OrbitStratum::ZeroDim);
        assert_eq!(desc.point(3.0, -1.0), f);
    }
}

#[test]
fn md_verify_is_seed_deterministic() {
    let alg = build_md5(Md5Family::F4 { lambda: 0.5 }).unwrap();
    let a = coadjoint::md_verify(&alg, 2_000, 9);
    let b = coadjoint::md_verify(&alg, 2_000, 9);
    assert_eq!(a, b);
    assert!(a.passed());
    assert!(a.rank_histogram.keys().all(|&r| r == 0 || r == 2));
}
