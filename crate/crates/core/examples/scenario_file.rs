//! Loading a JSON scenario and writing its CSV and SVG outputs.
//!
//! cargo run --release --example scenario_file [-- <scenario.json> [<output dir>]]

use std::path::PathBuf;

use articulated_parking::output::write_trajectory_csv;
use articulated_parking::plot::render_trajectory_svg;
use articulated_parking::run_jobs;
use articulated_parking::scenario::parse_scenario_file;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/paper-fig5.json"));
    let scenario = parse_scenario_file(&path)?;
    for w in scenario.warnings() {
        eprintln!("warning: {w}");
    }
    println!("{}", scenario.to_json_string());

    let out = args.next().map(PathBuf::from).unwrap_or_else(|| scenario.output.directory.clone());
    std::fs::create_dir_all(&out)?;
    for (k, result) in run_jobs(&scenario.jobs(), 1).into_iter().enumerate() {
        let traj = result?;
        let csv = out.join(format!("run-{k}.csv"));
        write_trajectory_csv(&traj, &csv)?;
        render_trajectory_svg(&traj, out.join(format!("run-{k}.svg")))?;
        println!("run {k}: {} at t = {:.2} s -> {}", traj.stop_reason, traj.last().t, csv.display());
    }
    Ok(())
}
