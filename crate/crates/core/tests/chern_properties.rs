use mdlab_core::chern::{
    self, expi_hermitian, max_abs, HalfLinePhase, MatrixField, PGamma3, Phat, Side, UGamma3, M2,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn hermitian() -> impl Strategy<Value = M2> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, d, re, im)| {
        M2::new(
            Complex64::new(a, 0.0),
            Complex64::new(re, -im),
            Complex64::new(re, im),
            Complex64::new(d, 0.0),
        )
    })
}

proptest! {
    #[test]
    fn phat_is_a_rank_one_projection(x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let p = Phat.eval(&[x, y]);
        prop_assert!(max_abs(&(p * p - p)) < 1e-12);
        prop_assert!(max_abs(&(p.adjoint() - p)) < 1e-15);
        prop_assert!((p.trace() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn p_gamma3_tends_to_q_linearly(t1 in -1.0..1.0f64, t2 in -1.0..1.0f64, phi in 0.0..6.3f64, s in 1e-4..1e-1f64) {
        let p = PGamma3.eval(&[s * t1, s * t2, phi]);
        prop_assert!(max_abs(&(p - chern::q_matrix())) <= 1.01 * s * t2.abs() + 1e-15);
    }

    #[test]
    fn u_gamma3_is_special_unitary(t1 in -3.2..3.2f64, t2 in -3.2..3.2f64, phi in 0.0..6.3f64) {
        let u = UGamma3.eval(&[t1, t2, phi]);
        prop_assert!(max_abs(&(u * u.adjoint() - M2::identity())) < 1e-14);
        prop_assert!((u.determinant() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn hermitian_exponentials_are_unitary_homomorphisms(h in hermitian(), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let e = expi_hermitian(s + t, &h);
        prop_assert!(max_abs(&(e * e.adjoint() - M2::identity())) < 1e-12);
        prop_assert!(max_abs(&(e - expi_hermitian(s, &h) * expi_hermitian(t, &h))) < 1e-11);
    }
}

#[test]
fn winding_is_additive_in_the_power() {
    for side in [Side::Plus, Side::Minus] {
        for k in -3..=3 {
            let w = chern::winding_1d(&HalfLinePhase { side, power: k }, side, 1e-8, "u").unwrap();
            assert_eq!(w.rounded, k as i64);
            assert!(w.residual < 1e-6);
        }
    }
}

#[test]
fn reference_orientation() {
    let r = chern::phat_chern(256).unwrap();
    assert_eq!(r.rounded, 1);
    assert!(r.refinement_delta.unwrap() < 1e-2);
}

#[test]
fn square_audit_does_not_detect_the_class() {
    for phi0 in [0.0, 1.0, 2.5] {
        let a = chern::gamma3_square_audit(128, phi0).unwrap();
        assert!(a.raw_integral.abs() < 1e-9);
    }
    let disk = chern::p_gamma3_disk(128).unwrap();
    assert_eq!(disk.rounded, 1);
}
