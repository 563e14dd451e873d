//! The Lyapunov value along a closed-loop run, and its predicted rate.
//!
//! cargo run --release --example lyapunov_check

use std::f64::consts::{FRAC_PI_4, PI};

use articulated_parking::{
    closed_loop_vdot, lyapunov_value, run_scenario, ControllerConfig, PolarState, RobotGeometry,
    SimulationConfig,
};

fn main() -> Result<(), articulated_parking::Error> {
    let geom = RobotGeometry::default();
    let ctrl = ControllerConfig::default();
    let initial = PolarState::new(5.0, -FRAC_PI_4, PI, 0.0)?;
    println!("V(0) = {:.6}", lyapunov_value(&initial, &ctrl.gains));
    println!("dV/dt(0) = -(v^2 + omega^2) = {:.6}", closed_loop_vdot(&initial, &ctrl.gains, &geom)?);

    let traj = run_scenario(&initial, &SimulationConfig::default(), &ctrl, &geom)?;
    println!("{:>7} {:>12} {:>14} {:>14}", "t", "V", "dV/dt", "finite diff");
    for w in traj.samples.windows(2).step_by(150) {
        let (a, b) = (&w[0], &w[1]);
        let predicted = closed_loop_vdot(&a.polar, &ctrl.gains, &geom)?;
        let observed = (b.lyapunov - a.lyapunov) / (b.t - a.t);
        println!("{:7.2} {:12.6} {:14.6} {:14.6}", a.t, a.lyapunov, predicted, observed);
    }
    let rises = traj.samples.windows(2).filter(|w| w[1].lyapunov > w[0].lyapunov).count();
    println!("{} samples, V increased {rises} times, stop: {}", traj.samples.len(), traj.stop_reason);
    Ok(())
}
