//! A start with theta2 = phi = 0 and theta1 != 0 freezes the law; the
//! articulation kick breaks the deadlock.
//!
//! cargo run --release --example deadlock_escape

use std::f64::consts::FRAC_PI_2;

use articulated_parking::{
    detect_deadlock, run_scenario, ControllerConfig, Mode, PolarState, RobotGeometry,
    SimulationConfig,
};

fn main() -> Result<(), articulated_parking::Error> {
    let geom = RobotGeometry::default();
    let initial = PolarState::new(5.0, FRAC_PI_2, 0.0, 0.0)?;
    let sim = SimulationConfig { t_max: 20.0, ..SimulationConfig::default() };

    let frozen = ControllerConfig { deadlock_escape: false, ..ControllerConfig::default() };
    println!("deadlock detected: {}", detect_deadlock(&initial, &frozen));
    let traj = run_scenario(&initial, &sim, &frozen, &geom)?;
    let last = traj.last().polar;
    println!(
        "without kick: {} at t = {:.1} s, e = {:.2e}, theta1 = {:.9} (stuck)",
        traj.stop_reason, traj.last().t, last.e, last.theta1
    );

    let ctrl = ControllerConfig::default();
    let traj = run_scenario(&initial, &SimulationConfig::default(), &ctrl, &geom)?;
    let kick = traj.samples.iter().take_while(|s| s.mode == Mode::Kick).count();
    println!(
        "with kick:    {kick} samples of KICK (omega = {}), then {} at t = {:.2} s",
        ctrl.kick_omega,
        traj.stop_reason,
        traj.last().t
    );
    Ok(())
}
