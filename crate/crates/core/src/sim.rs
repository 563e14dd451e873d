//! Fixed-step closed-loop simulation.
//!
//! A run records one [`TrajectorySample`] every `dt` seconds. Between samples
//! the plant is integrated with a fixed step of at most `max_step`, and the
//! controller is re-evaluated at the start of every integration step and
//! held constant across it (zero-order hold at the integration rate). The
//! law's gain grows like `1/e²` near the goal, so holding a command for a
//! whole 10 ms sample destabilizes the final approach.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::controller::{
    control_with_deadlock_handling, lyapunov_value, ControllerConfig, Mode,
};
use crate::error::{Error, Result};
use crate::model::{
    cartesian_derivative, cartesian_from_polar, polar_derivative, polar_from_cartesian, wrap,
    CartesianState, ControlCommand, PolarState, Rates, RobotGeometry, E_SINGULAR,
};
use crate::positioning::{
    add_bearing_noise, bearings_from_pose, polar_config_from_pose, pose_from_bearings,
    BeaconArray, Pose,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

/// Which set of kinematic equations is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    #[default]
    Cartesian,
    Polar,
}

/// Source of the polar state fed to the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedback {
    GroundTruth,
    /// Bearings synthesized from the true pose, optionally perturbed, then
    /// triangulated. The body angle is always read from the true state.
    Beacon { beacons: BeaconArray, sigma: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    /// Sampling period of the recorded trajectory (s).
    pub dt: f64,
    /// Simulated time budget (s).
    pub t_max: f64,
    /// Goal distance tolerance (m).
    pub e_tol: f64,
    /// Goal tolerance on `|θ₁|` and `|θ₂|` (rad).
    pub angle_tol: f64,
    /// Upper bound on the integration step (s).
    pub max_step: f64,
    pub feedback: Feedback,
    pub integrator: Integrator,
    pub frame: Frame,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 100.0,
            e_tol: 0.01,
            angle_tol: 0.05,
            max_step: 1e-4,
            feedback: Feedback::GroundTruth,
            integrator: Integrator::Rk4,
            frame: Frame::Cartesian,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return bad(format!("t_max ({}) must be at least dt ({})", self.t_max, self.dt));
        }
        if !(self.e_tol > E_SINGULAR && self.e_tol.is_finite()) {
            return bad(format!("e_tol must exceed {E_SINGULAR:e}, got {}", self.e_tol));
        }
        if !(self.angle_tol > 0.0 && self.angle_tol.is_finite()) {
            return bad(format!("angle_tol must be positive, got {}", self.angle_tol));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        if let Feedback::Beacon { sigma, .. } = self.feedback {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return bad(format!("sigma must be non-negative, got {sigma}"));
            }
        }
        Ok(())
    }

    /// Integration steps per recorded sample.
    pub fn substeps(&self) -> u64 {
        ((self.dt / self.max_step) * (1.0 - 1e-12)).ceil().max(1.0) as u64
    }

    pub fn is_at_goal(&self, p: &PolarState) -> bool {
        p.e < self.e_tol && p.theta1.abs() < self.angle_tol && p.theta2.abs() < self.angle_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    AtGoal,
    TimeBudget,
    Singularity,
    FeedbackFailure,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::AtGoal => "AT_GOAL",
            StopReason::TimeBudget => "TIME_BUDGET",
            StopReason::Singularity => "SINGULARITY",
            StopReason::FeedbackFailure => "FEEDBACK_FAILURE",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "AT_GOAL" => Ok(StopReason::AtGoal),
            "TIME_BUDGET" => Ok(StopReason::TimeBudget),
            "SINGULARITY" => Ok(StopReason::Singularity),
            "FEEDBACK_FAILURE" => Ok(StopReason::FeedbackFailure),
            other => Err(format!("unknown stop reason `{other}`")),
        }
    }
}

/// One recorded instant of a closed-loop run. `command` and `mode` are the
/// controller output computed at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub cartesian: CartesianState,
    pub polar: PolarState,
    pub command: ControlCommand,
    /// Lyapunov value of the true polar state.
    pub lyapunov: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub stop_reason: StopReason,
    /// The error that ended an abnormal run.
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn first(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn duration(&self) -> f64 {
        self.last().t - self.first().t
    }
}

/// Why a closed-loop step could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    Singularity(Error),
    Feedback(Error),
}

impl StepFailure {
    pub fn stop_reason(&self) -> StopReason {
        match self {
            StepFailure::Singularity(_) => StopReason::Singularity,
            StepFailure::Feedback(_) => StopReason::FeedbackFailure,
        }
    }

    pub fn into_error(self) -> Error {
        match self {
            StepFailure::Singularity(e) | StepFailure::Feedback(e) => e,
        }
    }
}

/// A state that can be advanced by the kinematic equations of its frame.
pub trait KinematicState: Copy {
    fn rates(&self, u: &ControlCommand, geom: &RobotGeometry) -> Result<Rates>;

    /// `self + h * k`, without wrapping angles.
    fn offset(&self, k: &Rates, h: f64) -> Self;

    /// Wraps the angles back into `(-pi, pi]`.
    fn normalized(self) -> Result<Self>;
}

impl KinematicState for CartesianState {
    fn rates(&self, u: &ControlCommand, geom: &RobotGeometry) -> Result<Rates> {
        cartesian_derivative(self, u, geom)
    }

    fn offset(&self, k: &Rates, h: f64) -> Self {
        Self {
            x: self.x + h * k[0],
            y: self.y + h * k[1],
            psi: self.psi + h * k[2],
            phi: self.phi + h * k[3],
        }
    }

    fn normalized(self) -> Result<Self> {
        CartesianState::new(self.x, self.y, self.psi, self.phi)
    }
}

impl KinematicState for PolarState {
    fn rates(&self, u: &ControlCommand, geom: &RobotGeometry) -> Result<Rates> {
        polar_derivative(self, u, geom)
    }

    fn offset(&self, k: &Rates, h: f64) -> Self {
        Self {
            e: self.e + h * k[0],
            theta1: self.theta1 + h * k[1],
            theta2: self.theta2 + h * k[2],
            phi: self.phi + h * k[3],
        }
    }

    fn normalized(self) -> Result<Self> {
        if !(self.e >= 0.0) {
            return Err(Error::AtGoal { e: self.e });
        }
        PolarState::new(self.e, self.theta1, self.theta2, self.phi)
    }
}

/// Classical fourth-order Runge-Kutta step with `u` held constant.
pub fn rk4_step<S: KinematicState>(
    state: &S,
    u: &ControlCommand,
    geom: &RobotGeometry,
    dt: f64,
) -> Result<S> {
    let k1 = state.rates(u, geom)?;
    let k2 = state.offset(&k1, 0.5 * dt).rates(u, geom)?;
    let k3 = state.offset(&k2, 0.5 * dt).rates(u, geom)?;
    let k4 = state.offset(&k3, dt).rates(u, geom)?;
    let mut k = [0.0; 4];
    for i in 0..4 {
        k[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    state.offset(&k, dt).normalized()
}

/// Forward Euler step, kept for convergence studies.
pub fn euler_step<S: KinematicState>(
    state: &S,
    u: &ControlCommand,
    geom: &RobotGeometry,
    dt: f64,
) -> Result<S> {
    let k = state.rates(u, geom)?;
    state.offset(&k, dt).normalized()
}

fn integrate<S: KinematicState>(
    integrator: Integrator,
    state: &S,
    u: &ControlCommand,
    geom: &RobotGeometry,
    h: f64,
) -> Result<S> {
    match integrator {
        Integrator::Rk4 => rk4_step(state, u, geom, h),
        Integrator::Euler => euler_step(state, u, geom, h),
    }
}

#[derive(Debug, Clone, Copy)]
enum Plant {
    Cartesian(CartesianState),
    Polar(PolarState),
}

impl Plant {
    fn new(frame: Frame, cartesian: CartesianState, polar: PolarState) -> Self {
        match frame {
            Frame::Cartesian => Plant::Cartesian(cartesian),
            Frame::Polar => Plant::Polar(polar),
        }
    }

    fn cartesian(&self) -> CartesianState {
        match self {
            Plant::Cartesian(c) => *c,
            Plant::Polar(p) => cartesian_from_polar(p),
        }
    }

    fn polar(&self) -> Result<PolarState> {
        match self {
            Plant::Cartesian(c) => polar_from_cartesian(c),
            Plant::Polar(p) => {
                p.check_away_from_goal()?;
                Ok(*p)
            }
        }
    }

    fn advance(&self, cfg: &SimulationConfig, u: &ControlCommand, geom: &RobotGeometry, h: f64) -> Result<Self> {
        Ok(match self {
            Plant::Cartesian(c) => Plant::Cartesian(integrate(cfg.integrator, c, u, geom, h)?),
            Plant::Polar(p) => Plant::Polar(integrate(cfg.integrator, p, u, geom, h)?),
        })
    }
}

fn stream_seed(seed: u64, counter: u64) -> u64 {
    // splitmix64 finalizer over the (seed, counter) pair.
    let mut z = seed ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The controller's view of the state. `truth` is the plant's own polar state.
fn observe(
    cfg: &SimulationConfig,
    truth: &PolarState,
    cartesian: &CartesianState,
    counter: u64,
) -> std::result::Result<PolarState, StepFailure> {
    match cfg.feedback {
        Feedback::GroundTruth => Ok(*truth),
        Feedback::Beacon { beacons, sigma, seed } => {
            let classify = |e: Error| {
                if e.is_singularity() {
                    StepFailure::Singularity(e)
                } else {
                    StepFailure::Feedback(e)
                }
            };
            let clean = bearings_from_pose(&Pose::from(cartesian), &beacons).map_err(classify)?;
            let measured = add_bearing_noise(&clean, sigma, stream_seed(seed, counter));
            let solution = pose_from_bearings(&measured, &beacons).map_err(classify)?;
            let config = polar_config_from_pose(&solution).map_err(classify)?;
            Ok(config.with_phi(cartesian.phi))
        }
    }
}

fn decide(
    cfg: &SimulationConfig,
    ctrl: &ControllerConfig,
    geom: &RobotGeometry,
    truth: &PolarState,
    cartesian: &CartesianState,
    counter: u64,
    previous: Mode,
) -> std::result::Result<(ControlCommand, Mode), StepFailure> {
    let observed = observe(cfg, truth, cartesian, counter)?;
    control_with_deadlock_handling(&observed, ctrl, geom, previous).map_err(StepFailure::Singularity)
}

fn sample_index(sample: &TrajectorySample, cfg: &SimulationConfig) -> u64 {
    (sample.t / cfg.dt).round().max(0.0) as u64
}

/// The `t = 0` sample of a run started from `initial`.
pub fn initial_sample(
    initial: &PolarState,
    cfg: &SimulationConfig,
    ctrl: &ControllerConfig,
    geom: &RobotGeometry,
) -> std::result::Result<TrajectorySample, StepFailure> {
    initial.check_away_from_goal().map_err(StepFailure::Singularity)?;
    let cartesian = cartesian_from_polar(initial);
    let (command, mode) = decide(cfg, ctrl, geom, initial, &cartesian, 0, Mode::Normal)?;
    Ok(TrajectorySample {
        t: 0.0,
        cartesian,
        polar: *initial,
        command,
        lyapunov: lyapunov_value(initial, &ctrl.gains),
        mode,
    })
}

/// Advances one recorded sample, i.e. `dt` seconds of closed-loop motion.
pub fn step_closed_loop(
    sample: &TrajectorySample,
    cfg: &SimulationConfig,
    ctrl: &ControllerConfig,
    geom: &RobotGeometry,
) -> std::result::Result<TrajectorySample, StepFailure> {
    let n = cfg.substeps();
    let h = cfg.dt / n as f64;
    let k = sample_index(sample, cfg);
    let mut plant = Plant::new(cfg.frame, sample.cartesian, sample.polar);
    let (mut command, mut mode) = (sample.command, sample.mode);
    for j in 0..n {
        if j > 0 {
            let truth = plant.polar().map_err(StepFailure::Singularity)?;
            (command, mode) =
                decide(cfg, ctrl, geom, &truth, &plant.cartesian(), k * n + j, mode)?;
        }
        plant = plant.advance(cfg, &command, geom, h).map_err(StepFailure::Singularity)?;
    }
    let cartesian = plant.cartesian();
    let polar = plant.polar().map_err(StepFailure::Singularity)?;
    let (command, mode) = decide(cfg, ctrl, geom, &polar, &cartesian, (k + 1) * n, mode)?;
    Ok(TrajectorySample {
        t: (k + 1) as f64 * cfg.dt,
        cartesian,
        polar,
        command,
        lyapunov: lyapunov_value(&polar, &ctrl.gains),
        mode,
    })
}

/// Runs one scenario until it parks, runs out of time, or fails.
///
/// Returns `Err` only for invalid inputs, including an initial state at
/// which the controller cannot be evaluated. Failures during the run end the
/// trajectory with the matching [`StopReason`].
pub fn run_scenario(
    initial: &PolarState,
    cfg: &SimulationConfig,
    ctrl: &ControllerConfig,
    geom: &RobotGeometry,
) -> Result<Trajectory> {
    cfg.validate()?;
    ctrl.validate()?;
    RobotGeometry::new(geom.l1, geom.l2)?;
    let initial = PolarState::new(initial.e, initial.theta1, initial.theta2, initial.phi)?;
    let first = initial_sample(&initial, cfg, ctrl, geom).map_err(StepFailure::into_error)?;

    let mut samples = vec![first];
    let mut k: u64 = 0;
    let (stop_reason, failure) = loop {
        let current = samples.last().expect("non-empty");
        if cfg.is_at_goal(&current.polar) {
            break (StopReason::AtGoal, None);
        }
        if (k + 1) as f64 * cfg.dt > cfg.t_max * (1.0 + 1e-12) {
            break (StopReason::TimeBudget, None);
        }
        match step_closed_loop(current, cfg, ctrl, geom) {
            Ok(next) => samples.push(next),
            Err(f) => break (f.stop_reason(), Some(f.into_error())),
        }
        k += 1;
    };
    Ok(Trajectory { samples, stop_reason, failure })
}

/// A fully specified scenario for batch execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub initial: PolarState,
    pub sim: SimulationConfig,
    pub controller: ControllerConfig,
    pub geometry: RobotGeometry,
}

/// Runs every job on up to `parallelism` threads. Results keep the input
/// order and do not depend on the thread count.
pub fn run_jobs(jobs: &[Job], parallelism: usize) -> Vec<Result<Trajectory>> {
    let run = |j: &Job| run_scenario(&j.initial, &j.sim, &j.controller, &j.geometry);
    if parallelism <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(run).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(parallelism).build() {
        Ok(pool) => pool.install(|| jobs.par_iter().map(run).collect()),
        Err(_) => jobs.iter().map(run).collect(),
    }
}

/// Runs several initial conditions under one configuration.
pub fn run_batch(
    initials: &[PolarState],
    cfg: &SimulationConfig,
    ctrl: &ControllerConfig,
    geom: &RobotGeometry,
    parallelism: usize,
) -> Vec<Result<Trajectory>> {
    let jobs: Vec<Job> = initials
        .iter()
        .map(|initial| Job { initial: *initial, sim: *cfg, controller: *ctrl, geometry: *geom })
        .collect();
    run_jobs(&jobs, parallelism)
}

/// Angle difference folded into `[0, pi]`, for comparing wrapped angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap(a - b).abs().min(PI)
}
