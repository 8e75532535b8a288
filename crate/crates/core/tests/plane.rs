use std::f64::consts::{FRAC_1_SQRT_2, PI};

use proptest::prelude::*;
use vtorsion::integrator::integrate_two_sided;
use vtorsion::plane::{
    arcsin_invariant, confinement_check, flat_invariant, potential_rate_residual, strip_bounds, strip_quadrature, time_at_height,
    PlaneField,
};
use vtorsion::{integrate, ChartGeometry, GeodesicState, IntegratorSettings, Trace};

fn trace(field: &PlaneField, pos: [f64; 2], vel: [f64; 2], t: f64) -> Trace {
    integrate_two_sided(&ChartGeometry::euclidean(), &field.to_spec(), &GeodesicState::new(0.0, pos, vel), &IntegratorSettings::rk4(1e-3, 0.0, 1.0), -t, t).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn flat_invariant_for_winding_and_shear() {
    let s = FRAC_1_SQRT_2;
    for (field, pos, vel) in [
        (PlaneField::winding(), [0.0, 0.0], [s, s]),
        (PlaneField::winding(), [0.0, 2.0], [1.0, 0.0]),
        (PlaneField::shear(), [1.0, 1.0], [s, s]),
        (PlaneField::shear(), [1.0, 1.0], [-0.6, 0.8]),
    ] {
        let tr = trace(&field, pos, vel, 10.0);
        let inv = flat_invariant(&field, &tr).unwrap();
        assert!(inv.passed(), "{} from {pos:?}: {}", field.id, inv.deviation.max_dev);
        // ṗ = κ along the trace
        assert!(potential_rate_residual(&field, &tr).unwrap() < 1e-6);
    }
}

#[test]
fn arcsin_invariant_holds_per_branch() {
    let tr = trace(&PlaneField::shear(), [1.0, 1.0], [-1.0, 0.0], 20.0);
    let rep = arcsin_invariant(&tr).unwrap();
    assert!(rep.passed(), "max std {}", rep.max_std());
}

#[test]
fn reference_strip() {
    let s = FRAC_1_SQRT_2;
    let b = strip_bounds(1.0, s, s);
    assert!((b.c - (0.5 - PI / 4.0)).abs() < 1e-15);
    let want = (2.0 * (b.c + PI)).sqrt();
    assert!((b.upper - want).abs() < 1e-12 && (b.lower + want).abs() < 1e-12);
    assert!((b.upper - 2.39033).abs() < 3e-4);
    let tr = trace(&PlaneField::shear(), [1.0, 1.0], [s, s], 50.0);
    let conf = confinement_check(&tr).unwrap();
    assert!(conf.verdict.passed(), "excess {}", conf.max_excess);
}

#[test]
fn strip_time_matches_simpson_and_trace() {
    let s = FRAC_1_SQRT_2;
    let b = strip_bounds(1.0, s, s);
    let f = |y: f64| 1.0 / (y * y / 2.0 - b.c).sin();
    for target in [1.2, 1.5, 2.0] {
        let q = strip_quadrature(1.0, target, b.c, b.sign).unwrap();
        let oracle = simpson(f, 1.0, target, 20_000);
        assert!((q.time - oracle).abs() < 1e-9, "{} vs {oracle}", q.time);
    }
    let tr = integrate(&ChartGeometry::euclidean(), &PlaneField::shear().to_spec(), &GeodesicState::new(0.0, [1.0, 1.0], [s, s]), &IntegratorSettings::rk4(1e-3, 0.0, 5.0)).unwrap();
    let t = time_at_height(&tr, 1.5, 0.0).unwrap();
    let q = strip_quadrature(1.0, 1.5, b.c, b.sign).unwrap();
    assert!((t - q.time).abs() < 1e-4);
}

#[test]
fn strip_time_grows_toward_the_bound() {
    let s = FRAC_1_SQRT_2;
    let b = strip_bounds(1.0, s, s);
    let mut last = 0.0;
    for k in 1..=11 {
        let y = b.upper - 10f64.powi(-k);
        let t = strip_quadrature(1.0, y, b.c, b.sign).unwrap();
        assert!(!t.diverged && t.time > last);
        last = t.time;
    }
    let at = strip_quadrature(1.0, b.upper, b.c, b.sign).unwrap();
    assert!(at.diverged && at.time > 1e3);
    assert!(strip_quadrature(1.0, b.upper + 0.1, b.c, b.sign).is_err());
}

#[test]
fn horizontal_launch_is_a_straight_line() {
    let b = strip_bounds(0.7, 0.0, 1.0);
    assert!(b.degenerate);
    // V = y∂ₓ is parallel to a horizontal velocity, so κ = 0
    let tr = trace(&PlaneField::shear(), [0.0, 0.7], [1.0, 0.0], 5.0);
    assert!(tr.states.iter().all(|st| (st.pos[1] - 0.7).abs() < 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn strip_bounds_bracket_the_start(y0 in -3.0..3.0f64, angle in -3.0..3.0f64) {
        prop_assume!(angle.sin().abs() > 1e-3 && angle.cos().abs() > 1e-3);
        let (xd, yd) = (angle.cos(), angle.sin());
        let b = strip_bounds(y0, yd, xd);
        prop_assert!(!b.degenerate);
        prop_assert!(b.contains(y0));
        prop_assert!(b.bound_residual() < 1e-12);
        // no singular level strictly between y₀ and the bounds
        let phase0 = b.phase(y0).sin();
        for k in 1..50 {
            let w = k as f64 / 50.0;
            for y in [y0 + w * (b.upper.min(y0 + 10.0) - y0), y0 + w * (b.lower.max(y0 - 10.0) - y0)] {
                prop_assert!(b.phase(y).sin() * phase0 > 0.0);
            }
        }
    }

    #[test]
    fn winding_potential_rate(x in -2.0..2.0f64, y in -2.0..2.0f64, a in 0.0..6.28f64) {
        let field = PlaneField::winding();
        let tr = integrate(&ChartGeometry::euclidean(), &field.to_spec(), &GeodesicState::new(0.0, [x, y], [a.cos(), a.sin()]), &IntegratorSettings::rk4(1e-3, 0.0, 1.0)).unwrap();
        prop_assert!(potential_rate_residual(&field, &tr).unwrap() < 1e-6);
    }
}
