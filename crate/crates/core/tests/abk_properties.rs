mod common;

use mdlab_core::abk::{self, SixTerm, SixTermProblem, ZMap};
use proptest::prelude::*;

fn zmap(max: usize) -> impl Strategy<Value = ZMap> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5i64..=5, r * c).prop_map(move |d| ZMap::new(r, c, d))
    })
}

proptest! {
    #[test]
    fn snf_decomposition_holds(m in zmap(4)) {
        let s = abk::snf(&m);
        prop_assert_eq!(s.u.compose(&m).compose(&s.v), s.d.clone());
        prop_assert_eq!(s.u.compose(&s.u_inv), ZMap::identity(m.rows()));
        let f = s.invariant_factors();
        prop_assert!(f.iter().all(|&d| d > 0));
        prop_assert!(f.windows(2).all(|w| w[1] % w[0] == 0));
    }

    #[test]
    fn snf_matches_determinantal_divisors(m in zmap(4)) {
        prop_assert_eq!(abk::snf(&m).invariant_factors(), common::invariant_factors_by_minors(&m));
    }

    #[test]
    fn kernel_and_image_have_complementary_ranks(m in zmap(4)) {
        let ker = abk::kernel_basis(&m);
        let im = abk::image_basis(&m);
        prop_assert_eq!(ker.cols() + im.cols(), m.cols());
        prop_assert!(m.compose(&ker).is_zero() || ker.cols() == 0);
        for j in 0..m.cols() {
            prop_assert!(abk::in_lattice(&im, &m.column(j)));
        }
        prop_assert!(abk::same_subgroup(&im, &m));
    }

    #[test]
    fn composition_with_the_kernel_inclusion_is_exact(m in zmap(3)) {
        let ker = abk::kernel_basis(&m);
        prop_assume!(ker.cols() > 0);
        prop_assert!(abk::exact_between(&ker, &m));
    }
}

#[test]
fn displayed_patterns_are_exact() {
    assert!(SixTerm::on_integers([0, 1, 0, 1, 0, 1]).is_exact());
    assert!(SixTerm::on_integers([1, 0, 1, 0, 1, 0]).is_exact());
    assert!(!SixTerm::on_integers([1, 1, 0, 1, 0, 1]).is_exact());
}

#[test]
fn presets_solve_uniquely() {
    for name in ["gamma2", "gamma3"] {
        let sols = abk::solve_six_term(&SixTermProblem::preset(name, 2).unwrap()).unwrap();
        assert_eq!(sols.len(), 1, "{name}");
        assert!(sols[0].representative.is_exact());
    }
    assert!(SixTermProblem::preset("nope", 2).is_err());
}

#[test]
fn oversized_searches_are_refused() {
    let p = SixTermProblem::preset("allZ", 30).unwrap();
    assert!(matches!(
        abk::solve_six_term(&p),
        Err(abk::AbkError::SearchTooLarge { .. })
    ));
}
