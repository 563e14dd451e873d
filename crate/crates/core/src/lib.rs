//! Parking control for active-joint center-articulated mobile robots.
//!
//! * [`model`]: Cartesian and polar kinematics, frame conversions and guards.
//! * [`controller`]: Lyapunov value, the stabilizing law and deadlock escape.
//! * [`positioning`]: pose recovery from bearings to three beacons.
//! * [`sim`]: fixed-step closed-loop simulation and batch runs.
//! * [`scenario`], [`output`], [`plot`]: JSON scenarios, CSV trajectories and SVG figures.
//! * [`cli`]: the `artpark` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod controller;
pub mod error;
pub mod model;
pub mod output;
pub mod plot;
pub mod positioning;
pub mod scenario;
pub mod sim;

pub use controller::{
    closed_loop_vdot, control_law, control_with_deadlock_handling, detect_deadlock,
    lyapunov_value, ControllerConfig, Gains, Mode,
};
pub use error::{Error, Result};
pub use model::{
    articulation_factor, cartesian_derivative, cartesian_from_polar, polar_derivative,
    polar_from_cartesian, wrap_angle, CartesianState, ControlCommand, PolarState, Rates,
    RobotGeometry,
};
pub use positioning::{
    add_bearing_noise, bearings_from_pose, law_of_sines_residuals, polar_config_from_pose, pose_from_bearings,
    solve_range, solve_zeta1, BeaconArray, BearingMeasurement, PolarConfig, Pose, TriangulationSolution,
};
pub use sim::{
    run_batch, run_jobs, run_scenario, step_closed_loop, Feedback, Frame, Integrator, Job,
    SimulationConfig, StopReason, Trajectory, TrajectorySample,
};
