use std::f64::consts::{PI, TAU};

use articulated_parking::output::format_sig9;
use articulated_parking::scenario::ScenarioFile;
use articulated_parking::sim::angle_distance;
use articulated_parking::{
    add_bearing_noise, bearings_from_pose, cartesian_from_polar, closed_loop_vdot, control_law,
    control_with_deadlock_handling, law_of_sines_residuals, lyapunov_value, polar_config_from_pose,
    polar_derivative, polar_from_cartesian, pose_from_bearings, wrap_angle, BeaconArray,
    CartesianState, ControlCommand, ControllerConfig, Gains, Mode, PolarState, Pose, RobotGeometry,
};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn geometry() -> impl Strategy<Value = RobotGeometry> {
    (0.05..1.0f64, 0.05..1.0f64).prop_map(|(l1, l2)| RobotGeometry::new(l1, l2).unwrap())
}

fn gains() -> impl Strategy<Value = Gains> {
    (0.01..10.0f64, 0.01..10.0f64, 0.01..10.0f64, 0.001..1.0f64)
        .prop_map(|(a, b, c, d)| Gains::new(a, b, c, d).unwrap())
}

/// Polar states away from the goal with `|phi| < 2pi/3`, so that
/// `l2 + l1 cos(phi)` stays bounded away from zero when `l2 > l1 / 2`.
fn polar_state() -> impl Strategy<Value = PolarState> {
    (0.05..20.0f64, angle(), angle(), -2.0..2.0f64)
        .prop_map(|(e, t1, t2, phi)| PolarState::new(e, t1, t2, phi).unwrap())
}

fn safe_geometry() -> impl Strategy<Value = RobotGeometry> {
    (0.05..0.5f64, 0.0..1.0f64).prop_map(|(l1, extra)| RobotGeometry::new(l1, 0.6 * l1 + extra).unwrap())
}

fn collinear() -> BeaconArray {
    BeaconArray::new([0.0, 0.4], [0.0, 0.2], [0.0, 0.0]).unwrap()
}

fn approach_pose() -> impl Strategy<Value = Pose> {
    (-10.0..-0.2f64, -5.0..5.0f64, angle()).prop_map(|(x, y, t)| Pose::new(x, y, t))
}

proptest! {
    #[test]
    fn wrap_lands_in_half_open_interval(a in -1e4..1e4f64) {
        let w = wrap_angle(a).unwrap();
        prop_assert!(w > -PI && w <= PI);
        prop_assert_eq!(wrap_angle(w).unwrap(), w);
        let turns = ((a - w) / TAU).round();
        prop_assert!((a - w - turns * TAU).abs() < 1e-9);
    }

    #[test]
    fn wrap_is_periodic(a in -50.0..50.0f64, k in -20i32..20) {
        let shifted = wrap_angle(a + k as f64 * TAU).unwrap();
        prop_assert!(angle_distance(shifted, wrap_angle(a).unwrap()) < 1e-11);
    }

    #[test]
    fn polar_cartesian_round_trip(p in polar_state()) {
        let back = polar_from_cartesian(&cartesian_from_polar(&p)).unwrap();
        prop_assert!((back.e - p.e).abs() < 1e-12 * p.e.max(1.0));
        prop_assert!(angle_distance(back.theta1, p.theta1) < 1e-12);
        prop_assert!(angle_distance(back.theta2, p.theta2) < 1e-12);
        prop_assert_eq!(back.phi, p.phi);
    }

    #[test]
    fn cartesian_polar_round_trip(x in -20.0..20.0f64, y in -20.0..20.0f64, psi in angle(), phi in angle()) {
        prop_assume!(x.hypot(y) > 1e-3);
        let c = CartesianState::new(x, y, psi, phi).unwrap();
        let back = cartesian_from_polar(&polar_from_cartesian(&c).unwrap());
        prop_assert!((back.x - x).abs() < 1e-12 * x.abs().max(1.0) * 20.0);
        prop_assert!((back.y - y).abs() < 1e-12 * y.abs().max(1.0) * 20.0);
        prop_assert!(angle_distance(back.psi, psi) < 1e-12);
    }

    #[test]
    fn lyapunov_is_positive_definite(p in polar_state(), g in gains()) {
        prop_assert!(lyapunov_value(&p, &g) > 0.0);
        let zero = PolarState { e: 0.0, theta1: 0.0, theta2: 0.0, phi: 0.0 };
        prop_assert_eq!(lyapunov_value(&zero, &g), 0.0);
    }

    #[test]
    fn vdot_matches_gradient_along_flow(p in polar_state(), g in gains(), geom in safe_geometry()) {
        // Chain rule with the model's rates is an independent route to dV/dt.
        let u = control_law(&p, &g, &geom).unwrap();
        let r = polar_derivative(&p, &u, &geom).unwrap();
        let chain = g.lambda1 * p.e * r[0]
            + g.lambda2 * p.theta1 * r[1]
            + g.lambda3 * p.theta2 * r[2]
            + g.lambda4 * p.phi * r[3];
        let vdot = closed_loop_vdot(&p, &g, &geom).unwrap();
        prop_assert!(vdot <= 0.0);
        prop_assert!((chain - vdot).abs() <= 1e-9 * vdot.abs().max(1.0), "chain {} vs {}", chain, vdot);
    }

    #[test]
    fn law_is_linear_in_gains(p in polar_state(), g in gains(), geom in safe_geometry(), c in 0.01..100.0f64) {
        let u = control_law(&p, &g, &geom).unwrap();
        let uc = control_law(&p, &g.scaled(c), &geom).unwrap();
        prop_assert!((uc.v - c * u.v).abs() <= 1e-10 * (c * u.v).abs().max(1.0));
        prop_assert!((uc.omega - c * u.omega).abs() <= 1e-10 * (c * u.omega).abs().max(1.0));
    }

    #[test]
    fn outputs_stay_finite(p in polar_state(), g in gains(), geom in geometry()) {
        // Either a finite command or a guard error, never a non-finite value.
        if let Ok(u) = control_law(&p, &g, &geom) {
            prop_assert!(u.v.is_finite() && u.omega.is_finite());
        }
    }

    #[test]
    fn saturation_bounds_hold(p in polar_state(), geom in safe_geometry(), vm in 0.01..2.0f64, wm in 0.01..2.0f64) {
        let cfg = ControllerConfig { v_max: Some(vm), omega_max: Some(wm), ..ControllerConfig::default() };
        let (u, _) = control_with_deadlock_handling(&p, &cfg, &geom, Mode::Normal).unwrap();
        prop_assert!(u.v.abs() <= vm && u.omega.abs() <= wm);
    }

    #[test]
    fn triangulation_round_trip(pose in approach_pose()) {
        let beacons = collinear();
        let m = bearings_from_pose(&pose, &beacons).unwrap();
        let sol = pose_from_bearings(&m, &beacons).unwrap();
        prop_assert!((sol.pose.x - pose.x).abs() < 1e-9);
        prop_assert!((sol.pose.y - pose.y).abs() < 1e-9);
        prop_assert!(angle_distance(sol.pose.theta, pose.theta) < 1e-9);
        let (r1, r2) = law_of_sines_residuals(&m, &beacons, sol.zeta1, sol.d);
        prop_assert!(r1.abs() < 1e-9 && r2.abs() < 1e-9);
    }

    #[test]
    fn bent_array_round_trip(pose in (-10.0..-1.0f64, -1.5..1.5f64, angle()).prop_map(|(x, y, t)| Pose::new(x, y, t)), bx in -0.3..0.3f64, cx in -0.3..0.3f64) {
        let beacons = BeaconArray::new([0.0, 0.4], [bx, 0.2], [cx, -0.1]).unwrap();
        // Valid region: approach side of line BC, with B seen between A and C.
        let (a, b, c) = (beacons.a(), beacons.b(), beacons.c());
        let cross = (c[0] - b[0]) * (pose.y - b[1]) - (c[1] - b[1]) * (pose.x - b[0]);
        prop_assume!(cross * beacons.side() > 1e-3);
        let dir = |p: [f64; 2]| (p[1] - pose.y).atan2(p[0] - pose.x);
        let (to_a, to_c) = (wrap_angle(dir(a) - dir(b)).unwrap(), wrap_angle(dir(c) - dir(b)).unwrap());
        prop_assume!(to_a * to_c < 0.0 && to_a.abs() > 1e-3 && to_c.abs() > 1e-3);
        let m = bearings_from_pose(&pose, &beacons).unwrap();
        // Poses near the beacons' circumcircle are legitimately unresolvable.
        if let Ok(sol) = pose_from_bearings(&m, &beacons) {
            prop_assert!((sol.pose.x - pose.x).abs() < 1e-7);
            prop_assert!((sol.pose.y - pose.y).abs() < 1e-7);
            prop_assert!(angle_distance(sol.pose.theta, pose.theta) < 1e-7);
        }
    }

    #[test]
    fn polar_config_agrees_with_model(pose in approach_pose()) {
        let beacons = collinear();
        let sol = pose_from_bearings(&bearings_from_pose(&pose, &beacons).unwrap(), &beacons).unwrap();
        let cfg = polar_config_from_pose(&sol).unwrap();
        let model = polar_from_cartesian(&CartesianState::new(sol.pose.x, sol.pose.y, sol.pose.theta, 0.0).unwrap()).unwrap();
        prop_assert!((cfg.e - model.e).abs() < 1e-12);
        prop_assert!(angle_distance(cfg.theta1, model.theta1) < 1e-12);
        prop_assert!(angle_distance(cfg.theta2, model.theta2) < 1e-12);
    }

    #[test]
    fn heading_only_shifts_gamma(pose in approach_pose(), delta in -1.0..1.0f64) {
        let beacons = collinear();
        let m = bearings_from_pose(&pose, &beacons).unwrap();
        let turned = Pose::new(pose.x, pose.y, pose.theta + delta);
        let mt = bearings_from_pose(&turned, &beacons).unwrap();
        prop_assert!((mt.alpha - m.alpha).abs() < 1e-12);
        prop_assert!((mt.beta - m.beta).abs() < 1e-12);
        prop_assert!(angle_distance(mt.gamma, m.gamma - delta) < 1e-12);
    }

    #[test]
    fn zero_noise_is_identity(pose in approach_pose(), seed in any::<u64>()) {
        let m = bearings_from_pose(&pose, &collinear()).unwrap();
        prop_assert_eq!(add_bearing_noise(&m, 0.0, seed), m);
        prop_assert_eq!(add_bearing_noise(&m, 0.01, seed), add_bearing_noise(&m, 0.01, seed));
    }

    #[test]
    fn sig9_round_trips(v in -1e6..1e6f64) {
        let back: f64 = format_sig9(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs());
    }

    #[test]
    fn scenario_round_trip(
        l1 in 0.01..1.0f64, l2 in 0.01..1.0f64, g in gains(),
        p in prop::collection::vec(polar_state(), 1..4),
        dt in 0.001..0.1f64, seed in any::<u64>(), sigma in 0.0..0.01f64, beacon in any::<bool>(),
    ) {
        let ics: Vec<String> = p.iter().map(|s| format!("[{:?}, {:?}, {:?}, {:?}]", s.e, s.theta1, s.theta2, s.phi)).collect();
        let feedback = if beacon {
            format!(r#"{{"mode": "beacon", "sigma": {sigma:?}, "seed": {seed}}}"#)
        } else {
            r#"{"mode": "ground_truth"}"#.to_string()
        };
        let text = format!(
            r#"{{"geometry": {{"l1": {l1:?}, "l2": {l2:?}}},
                "gains": {{"lambda1": {:?}, "lambda2": {:?}, "lambda3": {:?}, "lambda4": {:?}}},
                "initial_conditions": [{}],
                "simulation": {{"dt": {dt:?}, "max_step": {dt:?}}},
                "feedback": {feedback}}}"#,
            g.lambda1, g.lambda2, g.lambda3, g.lambda4, ics.join(", ")
        );
        let parsed = ScenarioFile::from_json_str(&text).unwrap();
        let again = ScenarioFile::from_json_str(&parsed.to_json_string()).unwrap();
        prop_assert_eq!(&parsed, &again);
        prop_assert_eq!(parsed.to_json_string(), again.to_json_string());
    }
}

#[test]
fn command_constructor_rejects_non_finite() {
    assert!(ControlCommand::new(f64::NAN, 0.0).is_err());
    assert!(ControlCommand::new(0.0, f64::INFINITY).is_err());
}
