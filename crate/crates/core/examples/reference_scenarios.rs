//! The four reference parking scenarios, run to the goal.
//!
//! cargo run --release --example reference_scenarios [-- <output dir>]

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use articulated_parking::output::write_trajectory_csv;
use articulated_parking::plot::render_trajectory_svg;
use articulated_parking::{run_scenario, ControllerConfig, PolarState, RobotGeometry, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1);
    let geom = RobotGeometry::new(0.1, 0.1)?;
    let ctrl = ControllerConfig::default();
    let sim = SimulationConfig::default();
    let scenarios = [
        ("fig3", -FRAC_PI_4, -FRAC_PI_4),
        ("fig4", -FRAC_PI_4, PI),
        ("fig5", 3.0 * FRAC_PI_4, PI),
        ("fig6", PI, PI),
    ];
    for (name, theta1, theta2) in scenarios {
        let initial = PolarState::new(5.0, theta1, theta2, 0.0)?;
        let clock = Instant::now();
        let traj = run_scenario(&initial, &sim, &ctrl, &geom)?;
        let last = traj.last();
        println!(
            "{name}: v(0) = {:+.4}, {} after {:.2} s (e = {:.4}, theta1 = {:+.4}, theta2 = {:+.4}), {:.0} ms",
            traj.first().command.v,
            traj.stop_reason,
            last.t,
            last.polar.e,
            last.polar.theta1,
            last.polar.theta2,
            clock.elapsed().as_secs_f64() * 1e3
        );
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            write_trajectory_csv(&traj, format!("{dir}/{name}.csv"))?;
            render_trajectory_svg(&traj, format!("{dir}/{name}.svg"))?;
        }
    }
    Ok(())
}
