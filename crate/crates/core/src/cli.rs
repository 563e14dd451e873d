//! The `artpark` command line.
//!
//! Exit status is 0 on success, 1 for usage and validation errors, and 2 when
//! a run stops on a singularity or feedback failure or an I/O or
//! triangulation step fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::output::{read_trajectory_csv, write_trajectory_csv};
use crate::plot::render_trajectory_svg;
use crate::positioning::{polar_config_from_pose, pose_from_bearings, BearingMeasurement};
use crate::scenario::{parse_beacons_file, parse_scenario_file, OutputFormat, ScenarioFile};
use crate::sim::{run_jobs, StopReason, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "artpark", version, about = "Parking control for center-articulated robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every initial condition of one scenario file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the scenario's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several scenario files on a worker pool.
    Batch {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        #[arg(long, default_value_t = default_parallelism())]
        parallel: usize,
        /// Overrides every scenario's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the pose from three bearings (radians).
    Triangulate {
        #[arg(long)]
        beacons: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
    },
    /// Render a trajectory CSV as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Serialize)]
struct TriangulationReport {
    x_r: f64,
    y_r: f64,
    theta_r: f64,
    e: f64,
    theta1: f64,
    theta2: f64,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Failure { code: EXIT_INVALID, message: message.to_string() }
    }

    fn runtime(message: impl ToString) -> Self {
        Failure { code: EXIT_RUNTIME, message: message.to_string() }
    }

    fn from_error(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::invalid(e),
            _ => Failure::runtime(e),
        }
    }
}

/// Runs the command line and returns the process exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&[config], 0, out.as_deref()),
        Command::Batch { config, parallel, out } => {
            if parallel == 0 {
                Err(Failure::invalid("--parallel must be at least 1"))
            } else {
                simulate(&config, parallel, out.as_deref())
            }
        }
        Command::Triangulate { beacons, alpha, beta, gamma } => triangulate(&beacons, alpha, beta, gamma),
        Command::Plot { csv, out } => plot(&csv, &out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
}

/// `parallelism == 0` means one worker per available core.
fn simulate(configs: &[PathBuf], parallelism: usize, out: Option<&Path>) -> Result<(), Failure> {
    let mut scenarios: Vec<(String, ScenarioFile)> = Vec::new();
    for path in configs {
        let s = parse_scenario_file(path).map_err(Failure::invalid)?;
        for w in s.warnings() {
            eprintln!("warning: {}: {w}", path.display());
        }
        scenarios.push((file_stem(path), s));
    }

    let jobs: Vec<_> = scenarios.iter().flat_map(|(_, s)| s.jobs()).collect();
    let parallelism = if parallelism == 0 { default_parallelism() } else { parallelism };
    let mut results = run_jobs(&jobs, parallelism).into_iter();

    let mut worst = EXIT_OK;
    for (stem, s) in &scenarios {
        let dir = out.unwrap_or(&s.output.directory);
        fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
        let many = s.initial_conditions.len() > 1;
        for k in 0..s.initial_conditions.len() {
            let name = if many { format!("{stem}-{k}") } else { stem.clone() };
            let traj = match results.next().expect("one result per job") {
                Ok(t) => t,
                Err(e) => {
                    let f = Failure::from_error(e);
                    eprintln!("error: {name}: {}", f.message);
                    worst = worst.max(f.code);
                    continue;
                }
            };
            write_outputs(&traj, dir, &name, &s.output.formats)?;
            report(&name, &traj);
            if matches!(traj.stop_reason, StopReason::Singularity | StopReason::FeedbackFailure) {
                worst = worst.max(EXIT_RUNTIME);
            }
        }
    }
    if worst == EXIT_OK {
        Ok(())
    } else {
        Err(Failure { code: worst, message: "one or more runs failed".into() })
    }
}

fn write_outputs(traj: &Trajectory, dir: &Path, name: &str, formats: &[OutputFormat]) -> Result<(), Failure> {
    for f in formats {
        match f {
            OutputFormat::Csv => write_trajectory_csv(traj, dir.join(format!("{name}.csv"))),
            OutputFormat::Svg => render_trajectory_svg(traj, dir.join(format!("{name}.svg"))),
        }
        .map_err(Failure::runtime)?;
    }
    Ok(())
}

fn report(name: &str, traj: &Trajectory) {
    let last = traj.last();
    let mut line = format!(
        "{name}: {} at t = {:.2} s, e = {:.6}, theta1 = {:.6}, theta2 = {:.6}, phi = {:.6}",
        traj.stop_reason, last.t, last.polar.e, last.polar.theta1, last.polar.theta2, last.polar.phi
    );
    if let Some(e) = &traj.failure {
        line.push_str(&format!(" ({e})"));
    }
    println!("{line}");
}

fn triangulate(beacons: &Path, alpha: f64, beta: f64, gamma: f64) -> Result<(), Failure> {
    let array = parse_beacons_file(beacons).map_err(Failure::invalid)?;
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !v.is_finite() {
            return Err(Failure::invalid(format!("{name} must be finite, got {v}")));
        }
    }
    let m = BearingMeasurement { alpha, beta, gamma };
    let sol = pose_from_bearings(&m, &array).map_err(Failure::runtime)?;
    let polar = polar_config_from_pose(&sol).map_err(Failure::runtime)?;
    let report = TriangulationReport {
        x_r: sol.pose.x,
        y_r: sol.pose.y,
        theta_r: sol.pose.theta,
        e: polar.e,
        theta1: polar.theta1,
        theta2: polar.theta2,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("plain numbers serialize"));
    Ok(())
}

fn plot(csv: &Path, out: &Path) -> Result<(), Failure> {
    let traj = read_trajectory_csv(csv).map_err(Failure::invalid)?;
    render_trajectory_svg(&traj, out).map_err(Failure::runtime)
}
