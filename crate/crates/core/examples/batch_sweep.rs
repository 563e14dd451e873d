//! A ring of starting headings run in parallel.
//!
//! cargo run --release --example batch_sweep [-- <threads>]

use std::f64::consts::PI;
use std::time::Instant;

use articulated_parking::{run_batch, ControllerConfig, PolarState, RobotGeometry, SimulationConfig};

fn main() -> Result<(), articulated_parking::Error> {
    let threads: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let initials: Vec<PolarState> = (0..16)
        .map(|k| PolarState::new(5.0, -PI / 4.0, -PI + k as f64 * PI / 8.0, 0.0))
        .collect::<Result<_, _>>()?;

    let clock = Instant::now();
    let results = run_batch(
        &initials,
        &SimulationConfig::default(),
        &ControllerConfig::default(),
        &RobotGeometry::default(),
        threads,
    );
    for (p, r) in initials.iter().zip(&results) {
        match r {
            Ok(t) => println!("theta2 = {:+.4}: {} at t = {:6.2} s", p.theta2, t.stop_reason, t.last().t),
            Err(e) => println!("theta2 = {:+.4}: {e}", p.theta2),
        }
    }
    println!("{} runs on {threads} threads in {:.0} ms", results.len(), clock.elapsed().as_secs_f64() * 1e3);
    Ok(())
}
