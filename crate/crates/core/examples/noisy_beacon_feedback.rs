//! Closing the loop through the beacon pipeline instead of the true state.
//!
//! cargo run --release --example noisy_beacon_feedback

use std::f64::consts::FRAC_PI_4;

use articulated_parking::{
    run_scenario, BeaconArray, ControllerConfig, Feedback, PolarState, RobotGeometry,
    SimulationConfig,
};

fn main() -> Result<(), articulated_parking::Error> {
    let geom = RobotGeometry::default();
    let ctrl = ControllerConfig::default();
    let initial = PolarState::new(5.0, -FRAC_PI_4, -FRAC_PI_4, 0.0)?;
    let beacons = BeaconArray::new([0.5, 0.2], [0.5, 0.0], [0.5, -0.2])?;

    for sigma in [0.0, 1e-4, 1e-3, 3e-3] {
        let sim = SimulationConfig {
            t_max: 40.0,
            feedback: Feedback::Beacon { beacons, sigma, seed: 7 },
            ..SimulationConfig::default()
        };
        let traj = run_scenario(&initial, &sim, &ctrl, &geom)?;
        let min_e = traj.samples.iter().map(|s| s.polar.e).fold(f64::INFINITY, f64::min);
        println!(
            "sigma = {sigma:.0e} rad: {} at t = {:.2} s, final e = {:.4} m, closest approach {min_e:.4} m",
            traj.stop_reason,
            traj.last().t,
            traj.last().polar.e
        );
    }
    Ok(())
}
