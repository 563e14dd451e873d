//! Frame conversion and open-loop motion of the articulated vehicle.
//!
//! cargo run --example kinematics

use articulated_parking::sim::rk4_step;
use articulated_parking::{
    cartesian_derivative, cartesian_from_polar, polar_derivative, polar_from_cartesian,
    CartesianState, ControlCommand, RobotGeometry,
};

fn main() -> Result<(), articulated_parking::Error> {
    let geom = RobotGeometry::new(0.1, 0.1)?;
    let start = CartesianState::new(-3.535534, 3.535534, 0.0, 0.0)?;
    let polar = polar_from_cartesian(&start)?;
    println!("cartesian {:?}\n  -> polar {:?}", start.as_array(), polar.as_array());
    println!("  -> back  {:?}", cartesian_from_polar(&polar).as_array());

    let u = ControlCommand::new(0.5, 0.2)?;
    println!("rates at start, v = 0.5, omega = 0.2");
    println!("  cartesian {:?}", cartesian_derivative(&start, &u, &geom)?);
    println!("  polar     {:?}", polar_derivative(&polar, &u, &geom)?);

    // Hold the command for two seconds: the joint bends and the path curves.
    let mut s = start;
    for k in 1..=200 {
        s = rk4_step(&s, &u, &geom, 0.01)?;
        if k % 50 == 0 {
            let p = polar_from_cartesian(&s)?;
            println!(
                "t = {:.1} s  x = {:+.4} y = {:+.4} psi = {:+.4} phi = {:+.4}  e = {:.4}",
                k as f64 * 0.01, s.x, s.y, s.psi, s.phi, p.e
            );
        }
    }
    Ok(())
}
