//! Trajectory CSV files.
//!
//! One row per recorded sample with the header
//! `t,x,y,psi,phi,e,theta1,theta2,v,omega,V,mode`, numbers printed with nine
//! significant digits in plain decimal notation, and a closing
//! `# stop_reason=<REASON>` comment line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::controller::Mode;
use crate::model::{CartesianState, ControlCommand, PolarState};
use crate::sim::{StopReason, Trajectory, TrajectorySample};

pub const CSV_HEADER: &str = "t,x,y,psi,phi,e,theta1,theta2,v,omega,V,mode";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// Nine significant digits, never exponent notation, no negative zero.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// The CSV text of a trajectory, identical for identical trajectories.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(160 * (traj.samples.len() + 2));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let nums = [
            s.t,
            s.cartesian.x,
            s.cartesian.y,
            s.cartesian.psi,
            s.cartesian.phi,
            s.polar.e,
            s.polar.theta1,
            s.polar.theta2,
            s.command.v,
            s.command.omega,
            s.lyapunov,
        ];
        for n in nums {
            out.push_str(&format_sig9(n));
            out.push(',');
        }
        out.push_str(s.mode.as_str());
        out.push('\n');
    }
    let _ = writeln!(out, "# stop_reason={}", traj.stop_reason);
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    fs::write(path, trajectory_csv(traj))
        .map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

/// Reads a file written by [`write_trajectory_csv`]. Values carry the
/// file's nine-digit precision.
pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<Trajectory, OutputError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| OutputError::Io { path: path.to_path_buf(), source })?;
    parse_trajectory_csv(&text).map_err(|message| OutputError::Format { path: path.to_path_buf(), message })
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory, String> {
    let stop_reason = text
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix("# stop_reason="))
        .ok_or("missing `# stop_reason=` line")?
        .parse::<StopReason>()?;

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(format!("unexpected header, expected `{CSV_HEADER}`"));
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let row = i + 2;
        let num = |k: usize| -> Result<f64, String> {
            record[k].parse::<f64>().map_err(|e| format!("row {row}, column {}: {e}", k + 1))
        };
        let mode = record[11].parse::<Mode>().map_err(|e| format!("row {row}: {e}"))?;
        samples.push(TrajectorySample {
            t: num(0)?,
            cartesian: CartesianState { x: num(1)?, y: num(2)?, psi: num(3)?, phi: num(4)? },
            polar: PolarState { e: num(5)?, theta1: num(6)?, theta2: num(7)?, phi: num(4)? },
            command: ControlCommand { v: num(8)?, omega: num(9)? },
            lyapunov: num(10)?,
            mode,
        });
    }
    if samples.is_empty() {
        return Err("no samples".into());
    }
    Ok(Trajectory { samples, stop_reason, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(-0.0), "0");
        assert_eq!(format_sig9(5.0), "5.00000000");
        assert_eq!(format_sig9(-std::f64::consts::FRAC_PI_4), "-0.785398163");
        assert_eq!(format_sig9(13.116850275068084), "13.1168503");
        assert_eq!(format_sig9(1.5e-7), "0.000000150000000");
        assert_eq!(format_sig9(123456789012.0), "123456789012");
        assert_eq!(format_sig9(9.9999999996), "10.0000000");
    }

    fn sample(t: f64, mode: Mode) -> TrajectorySample {
        TrajectorySample {
            t,
            cartesian: CartesianState { x: -1.0, y: 0.25, psi: 0.5, phi: -0.125 },
            polar: PolarState { e: 1.0307764064, theta1: -0.2449786631, theta2: -0.7449786631, phi: -0.125 },
            command: ControlCommand { v: 0.5, omega: -0.0 },
            lyapunov: 2.0,
            mode,
        }
    }

    #[test]
    fn csv_round_trip() {
        let traj = Trajectory {
            samples: vec![sample(0.0, Mode::Normal), sample(0.01, Mode::Kick)],
            stop_reason: StopReason::TimeBudget,
            failure: None,
        };
        let text = trajectory_csv(&traj);
        assert!(text.starts_with("t,x,y,psi,phi,e,theta1,theta2,v,omega,V,mode\n0,-1.00000000,"));
        assert!(text.ends_with("KICK\n# stop_reason=TIME_BUDGET\n"));
        assert!(!text.contains("-0,"));
        let back = parse_trajectory_csv(&text).unwrap();
        assert_eq!(back.samples.len(), 2);
        assert_eq!(back.stop_reason, StopReason::TimeBudget);
        assert_eq!(back.samples[1].mode, Mode::Kick);
        assert!((back.samples[0].polar.e - 1.0307764064).abs() < 1e-8);
        assert_eq!(trajectory_csv(&back), text);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(parse_trajectory_csv("t,x\n1,2\n# stop_reason=AT_GOAL\n").is_err());
        assert!(parse_trajectory_csv(&format!("{CSV_HEADER}\n")).is_err());
        let no_rows = format!("{CSV_HEADER}\n# stop_reason=AT_GOAL\n");
        assert!(parse_trajectory_csv(&no_rows).is_err());
    }
}
