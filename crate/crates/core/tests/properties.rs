use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use carousel_core::flow::{flow_map, integrate_orbit_with, Method, OrbitOptions};
use carousel_core::period::{audit_parabolic_bounds, radius_from_angles, turning_points, G_FLOOR};
use carousel_core::polygon::{carousel_defect, Circle, ClosedCurve, Ellipse, RigidMotion};
use carousel_core::scalar::{
    from_symmetric, hamiltonian, hamiltonian_gradient, hamiltonian_hessian, q_potential,
    q_potential_factored, to_symmetric, AngleState, EnergyLevel, H_BOUNDARY, H_MAX,
};
use carousel_core::{period, Vec2};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = AngleState> {
    (FRAC_PI_2 + 1e-3..PI, FRAC_PI_2 + 1e-3..PI)
        .prop_filter("inside D", |(x, y)| x + y < 1.5 * PI - 1e-3)
        .prop_map(|(x, y)| AngleState::new(x, y))
}

fn oscillatory() -> impl Strategy<Value = EnergyLevel> {
    (H_BOUNDARY + 1e-6..H_MAX - 1e-6).prop_map(EnergyLevel)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn potential_factorisation(h in 0.0..3.0f64, u in FRAC_PI_2..PI) {
        let h = EnergyLevel(h);
        prop_assert!((q_potential(h, u) - q_potential_factored(h, u)).abs() <= 1e-14);
    }

    #[test]
    fn symmetric_round_trip(s in admissible()) {
        let back = from_symmetric(to_symmetric(s));
        prop_assert!((back.x - s.x).abs() <= 1e-15);
        prop_assert!((back.y - s.y).abs() <= 1e-15);
    }

    #[test]
    fn hamiltonian_is_symmetric(s in admissible()) {
        prop_assert_eq!(hamiltonian(s).value(), hamiltonian(s.swapped()).value());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hessian_matches_finite_differences(s in admissible()) {
        let eps = 1e-6;
        let hess = hamiltonian_hessian(s);
        let gx = |d: f64| hamiltonian_gradient(AngleState::new(s.x + d, s.y));
        let gy = |d: f64| hamiltonian_gradient(AngleState::new(s.x, s.y + d));
        let dxx = (gx(eps)[0] - gx(-eps)[0]) / (2.0 * eps);
        let dxy = (gx(eps)[1] - gx(-eps)[1]) / (2.0 * eps);
        let dyy = (gy(eps)[1] - gy(-eps)[1]) / (2.0 * eps);
        prop_assert!((hess.xx - dxx).abs() < 1e-7);
        prop_assert!((hess.xy - dxy).abs() < 1e-7);
        prop_assert!((hess.yy - dyy).abs() < 1e-7);
    }

    #[test]
    fn time_reversal(s in admissible(), t in 0.05..0.5f64) {
        let forward = flow_map(s, -t, 1e-3);
        let mirrored = flow_map(s.swapped(), t, 1e-3).swapped();
        prop_assert!(forward.distance(mirrored) < 1e-12);
    }

    #[test]
    fn radius_stays_inside_the_disk(s in admissible()) {
        prop_assert!(radius_from_angles(s) <= 1.0 + SQRT_2 + 1e-12);
    }

    #[test]
    fn turning_points_bracket(h in oscillatory()) {
        let tp = turning_points(h).unwrap();
        prop_assert!(FRAC_PI_2 < tp.u_minus && tp.u_minus < 2.0 * PI / 3.0);
        prop_assert!(2.0 * PI / 3.0 < tp.u_plus && tp.u_plus < 0.75 * PI);
        prop_assert!(tp.residual <= 1e-12);
        prop_assert!(4.0 * tp.u_plus.sin() >= G_FLOOR);
    }

    #[test]
    fn audits_pass_across_the_range(h in oscillatory()) {
        let a = audit_parabolic_bounds(h, 201).unwrap();
        prop_assert!(a.pass, "{:?}", a);
        prop_assert!(a.g_identity_residual < 1e-12);
    }

    #[test]
    fn carousel_defect_is_rigid_invariant(theta in -PI..PI, dx in -5.0..5.0f64, dy in -5.0..5.0f64) {
        let base = Ellipse::new(2.0, 1.0).unwrap();
        let moved = RigidMotion::new(base.clone(), theta, Vec2::new(dx, dy));
        prop_assert!((moved.perimeter() - base.perimeter()).abs() < 1e-12);
        let a = carousel_defect(&base, 6, 16).unwrap();
        let b = carousel_defect(&moved, 6, 16).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        let circle = RigidMotion::new(Circle::new(2.0), theta, Vec2::new(dx, dy));
        prop_assert!(carousel_defect(&circle, 5, 16).unwrap() < 1e-10);
    }
}

#[test]
fn audits_at_both_ends() {
    for h in [H_BOUNDARY + 1e-6, H_MAX - 1e-6] {
        assert!(audit_parabolic_bounds(EnergyLevel(h), 1001).unwrap().pass);
    }
}

/// Successive maxima of `r(t)` are one period apart.
#[test]
fn radius_period_from_maxima() {
    for h in [2.45, 2.5, 2.56] {
        let t_quad = period(EnergyLevel(h)).unwrap().period;
        let tp = turning_points(EnergyLevel(h)).unwrap();
        let s0 = AngleState::new(tp.u_minus, tp.u_minus);
        let opts = OrbitOptions {
            record_every: 1,
            ..OrbitOptions::default()
        };
        let orbit = integrate_orbit_with(s0, 3.5 * t_quad, 1e-3, Method::FixedRk4, &opts).unwrap();
        let r: Vec<f64> = orbit.samples.iter().map(|s| radius_from_angles(s.state)).collect();
        let t: Vec<f64> = orbit.samples.iter().map(|s| s.t).collect();
        // parabolic vertex through three samples around each discrete peak
        let peaks: Vec<f64> = (1..r.len() - 1)
            .filter(|&k| r[k] > r[k - 1] && r[k] >= r[k + 1])
            .map(|k| {
                let (a, b, c) = (r[k - 1], r[k], r[k + 1]);
                let dt = t[k + 1] - t[k];
                t[k] + 0.5 * dt * (a - c) / (a - 2.0 * b + c)
            })
            .collect();
        assert!(peaks.len() >= 3, "{peaks:?}");
        for w in peaks.windows(2) {
            assert!(((w[1] - w[0]) - t_quad).abs() < 1e-5, "{} vs {t_quad}", w[1] - w[0]);
        }
    }
}
