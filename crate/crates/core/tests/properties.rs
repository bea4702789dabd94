use std::f64::consts::{PI, TAU};

use approx::{abs_diff_eq, assert_abs_diff_eq};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use q8_core::group::{compose, q8_group};
use q8_core::hopf::{act, normal_form, ComplexPair, HopfCoeffs};
use q8_core::stability::NodeEigenSplit;
use q8_core::torus::{
    circular_distance, factored_field, reduced_field, sin_cos, wrap, Params, Theta3,
};

fn complex() -> impl Strategy<Value = C> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn pair() -> impl Strategy<Value = ComplexPair> {
    (complex(), complex()).prop_map(|(z_plus, z_minus)| ComplexPair { z_plus, z_minus })
}

fn pair_close(x: &ComplexPair, y: &ComplexPair, eps: f64) -> bool {
    (x.z_plus - y.z_plus).norm() < eps && (x.z_minus - y.z_minus).norm() < eps
}

proptest! {
    #[test]
    fn group_multiplication_is_associative(i in 0usize..16, j in 0usize..16, k in 0usize..16) {
        let g = q8_group().unwrap();
        prop_assert_eq!(g.mult(g.mult(i, j), k), g.mult(i, g.mult(j, k)));
        let (p, q) = (g.element(i), g.element(j));
        prop_assert_eq!(g.index_of(&compose(p, q)), Some(g.mult(i, j)));
    }

    #[test]
    fn inverses_cancel(i in 0usize..16) {
        let g = q8_group().unwrap();
        prop_assert_eq!(g.mult(i, g.inverse_index(i)), g.identity_index());
    }

    #[test]
    fn wrap_lands_in_one_turn(x in -1e4..1e4f64) {
        let w = wrap(x);
        prop_assert!((0.0..TAU).contains(&w));
        prop_assert!(abs_diff_eq!(circular_distance(w, x), 0.0, epsilon = 1e-9));
    }

    #[test]
    fn circular_distance_is_a_metric(a in -20.0..20.0f64, b in -20.0..20.0f64, c in -20.0..20.0f64) {
        let (ab, bc, ac) = (circular_distance(a, b), circular_distance(b, c), circular_distance(a, c));
        prop_assert!(ab <= PI + 1e-12);
        assert_abs_diff_eq!(ab, circular_distance(b, a), epsilon = 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn reduced_sin_cos_agrees_with_std(x in -100.0..100.0f64, k in -50i32..50) {
        let (s, c) = sin_cos(x);
        assert_abs_diff_eq!(s, x.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(c, x.cos(), epsilon = 1e-12);
        prop_assert_eq!(sin_cos(f64::from(k) * PI).0, 0.0);
    }

    #[test]
    fn factored_field_matches_expanded(
        t in prop::array::uniform3(-7.0..7.0f64),
        u in -2.0..2.0f64, eps in -1.0..1.0f64, q in -2.0..2.0f64,
    ) {
        let p = Params::new(u, eps, q);
        let th = Theta3(t);
        let (a, b) = (reduced_field(&th, &p), factored_field(&th, &p));
        for k in 0..3 {
            assert_abs_diff_eq!(a[k], b[k], epsilon = 1e-12);
        }
        let shifted = Theta3(std::array::from_fn(|k| t[k] + TAU));
        let c = factored_field(&shifted, &p);
        for k in 0..3 {
            assert_abs_diff_eq!(b[k], c[k], epsilon = 1e-11);
        }
    }

    #[test]
    fn normal_form_commutes_with_the_action(
        z in pair(), an in complex(), b in complex(), c in complex(), d in complex(),
        phi in -PI..PI, word in prop::sample::select(vec!["k", "r", "rk", "r^2", "kr^3"]),
    ) {
        let coeffs = HopfCoeffs { a_n: an, b, c, d, ..Default::default() };
        let lhs = act(word, &normal_form(&z, &coeffs), phi).unwrap();
        let rhs = normal_form(&act(word, &z, phi).unwrap(), &coeffs);
        prop_assert!(pair_close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn node_index_depends_on_ratios_only(
        e in 0.1..5.0f64, c in 0.1..5.0f64, t in -5.0..5.0f64, s in 0.1..10.0f64,
    ) {
        let base = NodeEigenSplit::from_axes("n", [e, -c, t], 0, 1).unwrap();
        let scaled = NodeEigenSplit::from_axes("n", [s * e, -s * c, s * t], 0, 1).unwrap();
        assert_abs_diff_eq!(base.rho(), scaled.rho(), epsilon = 1e-12);
    }
}
