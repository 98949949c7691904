//! Metric properties of the two half-space models, checked against an
//! independent quadrature oracle and randomized isometry words.

use num_complex::Complex64;
use proptest::prelude::*;

use zonal::hyperbolic::{distance, HPoint, IsometryClass, Mobius};

/// Composite Simpson rule on a smooth integrand.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// The geodesic from i to 1+i is the half-circle centered at 1/2 of radius
/// √5/2; its hyperbolic length is ∫ dθ/sin θ between the endpoint angles.
/// Integrating that arc is a derivation independent of the acosh formula.
#[test]
fn quadrature_along_the_geodesic_arc_matches_distance() {
    let theta_hi = f64::atan2(1.0, -0.5);
    let theta_lo = f64::atan2(1.0, 0.5);
    let oracle = simpson(|t| 1.0 / t.sin(), theta_lo, theta_hi, 4096);

    let z = HPoint::h2(0.0, 1.0).unwrap();
    let w = HPoint::h2(1.0, 1.0).unwrap();
    let d = distance(&z, &w).unwrap();
    assert!((d - oracle).abs() < 1e-10, "d = {d}, quadrature = {oracle}");
    // And the closed form for the same pair.
    assert!((d - 1.5f64.acosh()).abs() < 1e-14);
}

#[test]
fn vertical_distance_in_h3_is_log_of_height_ratio() {
    let p = HPoint::h3(0.0, 0.0, 1.0).unwrap();
    let q = HPoint::h3(0.0, 0.0, std::f64::consts::E).unwrap();
    assert!((distance(&p, &q).unwrap() - 1.0).abs() < 1e-14);
}

/// Sanity anchors for the classification used by group validation.
#[test]
fn classification_of_elementary_maps() {
    let t = Mobius::translation(Complex64::new(2.0, 0.0));
    assert_eq!(t.classify(), IsometryClass::Parabolic);
    let u: f64 = 0.8;
    let lox = Mobius::from_real((u / 2.0).exp(), 0.0, 0.0, (-u / 2.0).exp()).unwrap();
    assert_eq!(lox.classify(), IsometryClass::Loxodromic);
    let rot = Mobius::from_real(0.6, -0.8, 0.8, 0.6).unwrap();
    assert_eq!(rot.classify(), IsometryClass::Elliptic);
}

/// A short word in real elementary maps: translations, dilations, and
/// rotations generate enough of PSL(2, ℝ) to exercise every code path.
fn h2_isometry() -> impl Strategy<Value = Mobius> {
    let elementary = prop_oneof![
        (-3.0f64..3.0).prop_map(|t| Mobius::translation(Complex64::new(t, 0.0))),
        (-1.5f64..1.5).prop_map(|u| {
            Mobius::from_real((u / 2.0).exp(), 0.0, 0.0, (-u / 2.0).exp()).unwrap()
        }),
        (0.0f64..std::f64::consts::PI).prop_map(|th| {
            Mobius::from_real(th.cos(), -th.sin(), th.sin(), th.cos()).unwrap()
        }),
    ];
    prop::collection::vec(elementary, 1..5)
        .prop_map(|ms| ms.iter().fold(Mobius::identity(), |acc, m| acc.compose(m)))
}

fn h2_point() -> impl Strategy<Value = HPoint> {
    (-5.0f64..5.0, 0.05f64..20.0).prop_map(|(x, y)| HPoint::h2(x, y).unwrap())
}

/// Complex translations and loxodromic/elliptic diagonals give words that
/// move genuinely three-dimensionally.
fn h3_isometry() -> impl Strategy<Value = Mobius> {
    let elementary = prop_oneof![
        (-3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|(x, y)| Mobius::translation(Complex64::new(x, y))),
        (-1.5f64..1.5, 0.0f64..std::f64::consts::PI).prop_map(|(u, th)| {
            let lam = Complex64::from_polar((u / 2.0).exp(), th / 2.0);
            Mobius::new(lam, Complex64::ZERO, Complex64::ZERO, lam.inv()).unwrap()
        }),
        (0.0f64..std::f64::consts::PI).prop_map(|th| {
            Mobius::from_real(th.cos(), -th.sin(), th.sin(), th.cos()).unwrap()
        }),
    ];
    prop::collection::vec(elementary, 1..5)
        .prop_map(|ms| ms.iter().fold(Mobius::identity(), |acc, m| acc.compose(m)))
}

fn h3_point() -> impl Strategy<Value = HPoint> {
    (-5.0f64..5.0, -5.0f64..5.0, 0.05f64..20.0)
        .prop_map(|(x, y, t)| HPoint::h3(x, y, t).unwrap())
}

proptest! {
    #[test]
    fn distance_is_symmetric_to_the_bit(z in h2_point(), w in h2_point()) {
        prop_assert_eq!(distance(&z, &w).unwrap(), distance(&w, &z).unwrap());
    }

    #[test]
    fn h2_words_are_isometries(g in h2_isometry(), z in h2_point(), w in h2_point()) {
        let d = distance(&z, &w).unwrap();
        let dg = distance(&g.apply(&z).unwrap(), &g.apply(&w).unwrap()).unwrap();
        prop_assert!((d - dg).abs() <= 1e-9 * (1.0 + d), "d = {d}, moved = {dg}");
    }

    #[test]
    fn h3_words_are_isometries(g in h3_isometry(), p in h3_point(), q in h3_point()) {
        let d = distance(&p, &q).unwrap();
        let dg = distance(&g.apply(&p).unwrap(), &g.apply(&q).unwrap()).unwrap();
        prop_assert!((d - dg).abs() <= 1e-9 * (1.0 + d), "d = {d}, moved = {dg}");
    }

    #[test]
    fn triangle_inequality(z in h2_point(), v in h2_point(), w in h2_point()) {
        let zw = distance(&z, &w).unwrap();
        let zv = distance(&z, &v).unwrap();
        let vw = distance(&v, &w).unwrap();
        prop_assert!(zw <= zv + vw + 1e-9);
    }

    #[test]
    fn vertical_geodesic_distance(y1 in 0.05f64..20.0, y2 in 0.05f64..20.0) {
        let expected = (y1 / y2).ln().abs();
        let d = distance(
            &HPoint::h2(0.0, y1).unwrap(),
            &HPoint::h2(0.0, y2).unwrap(),
        )
        .unwrap();
        prop_assert!((d - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn composition_matches_sequential_application(
        a in h2_isometry(),
        b in h2_isometry(),
        z in h2_point(),
    ) {
        let via_product = a.compose(&b).apply(&z).unwrap();
        let sequential = a.apply(&b.apply(&z).unwrap()).unwrap();
        prop_assert!(distance(&via_product, &sequential).unwrap() <= 1e-9);
    }

    #[test]
    fn inverse_round_trips_points(g in h3_isometry(), p in h3_point()) {
        let back = g.inverse().apply(&g.apply(&p).unwrap()).unwrap();
        prop_assert!(distance(&back, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn powers_agree_with_repeated_composition(
        g in h2_isometry(),
        k in 0i64..6,
        z in h2_point(),
    ) {
        let mut acc = Mobius::identity();
        for _ in 0..k {
            acc = acc.compose(&g);
        }
        let via_pow = g.pow(k).apply(&z).unwrap();
        prop_assert!(distance(&via_pow, &acc.apply(&z).unwrap()).unwrap() <= 1e-9);
    }
}
