//! Kinematics of a two-body center-articulated vehicle.
//!
//! The vehicle state is available in two equivalent frames:
//!
//! * Cartesian `(x, y, psi, phi)`: position of the front body, heading of the
//!   front body and the articulation (body) angle.
//! * Polar `(e, theta1, theta2, phi)`: distance to the goal, heading of the
//!   robot-to-goal vector in the target frame, and the angle from that vector
//!   to the heading.
//!
//! The goal is the origin of the target frame. `theta1` is the direction of the
//! vector pointing *from* the robot *to* the goal and `theta2 = theta1 - psi`.
//! With this convention `de/dt = -v cos(theta2)` and
//! `dtheta1/dt = v sin(theta2) / e` hold identically.

use std::f64::consts::{PI, TAU};

use crate::error::{ensure_finite, Error, Result};

/// Below this distance the polar angles are treated as undefined.
pub const E_SINGULAR: f64 = 1e-9;

/// Relative articulation guard: `|l2 + l1 cos(phi)| < ARTICULATION_GUARD * (l1 + l2)` is singular.
pub const ARTICULATION_GUARD: f64 = 1e-6;

/// Time derivative of a state, in the same field order as the state.
pub type Rates = [f64; 4];

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> Result<f64> {
    ensure_finite("angle", a)?;
    Ok(wrap(a))
}

// `%` is exact, and both corrections are exact by Sterbenz, so `wrap` is idempotent.
#[inline]
pub(crate) fn wrap(a: f64) -> f64 {
    let r = a % TAU;
    if r > PI {
        r - TAU
    } else if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Front and rear body lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry {
    pub l1: f64,
    pub l2: f64,
}

impl RobotGeometry {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        ensure_finite("l1", l1)?;
        ensure_finite("l2", l2)?;
        if l1 <= 0.0 || l2 <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "body lengths must be positive, got l1 = {l1}, l2 = {l2}"
            )));
        }
        Ok(Self { l1, l2 })
    }

    /// Whether `l2 + l1 cos(phi) = 0` has a solution, i.e. `l2 <= l1`.
    pub fn singularity_reachable(&self) -> bool {
        self.l2 <= self.l1
    }

    /// Absolute threshold used by [`articulation_factor`].
    pub fn articulation_guard(&self) -> f64 {
        ARTICULATION_GUARD * (self.l1 + self.l2)
    }
}

impl Default for RobotGeometry {
    /// The 0.1 m + 0.1 m robot used by the bundled scenarios.
    fn default() -> Self {
        Self { l1: 0.1, l2: 0.1 }
    }
}

/// Returns `l2 + l1 cos(phi)`, or an error when it is inside the guard band.
pub fn articulation_factor(phi: f64, geom: &RobotGeometry) -> Result<f64> {
    let factor = geom.l2 + geom.l1 * phi.cos();
    if !factor.is_finite() || factor.abs() < geom.articulation_guard() {
        return Err(Error::ArticulationSingularity { phi, factor });
    }
    Ok(factor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    /// Heading of the front body, `(-pi, pi]`.
    pub psi: f64,
    /// Body angle, `(-pi, pi]`.
    pub phi: f64,
}

impl CartesianState {
    /// Validates finiteness and wraps both angles.
    pub fn new(x: f64, y: f64, psi: f64, phi: f64) -> Result<Self> {
        Ok(Self {
            x: ensure_finite("x", x)?,
            y: ensure_finite("y", y)?,
            psi: wrap_angle(psi)?,
            phi: wrap_angle(phi)?,
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.psi, self.phi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    /// Distance to the goal (m).
    pub e: f64,
    /// Direction of the robot-to-goal vector in the target frame.
    pub theta1: f64,
    /// Angle from the robot-to-goal vector to the heading direction.
    pub theta2: f64,
    pub phi: f64,
}

impl PolarState {
    /// Validates `e >= 0`, finiteness, and wraps the angles.
    pub fn new(e: f64, theta1: f64, theta2: f64, phi: f64) -> Result<Self> {
        ensure_finite("e", e)?;
        if e < 0.0 {
            return Err(Error::InvalidInput(format!("e must be non-negative, got {e}")));
        }
        Ok(Self {
            e,
            theta1: wrap_angle(theta1)?,
            theta2: wrap_angle(theta2)?,
            phi: wrap_angle(phi)?,
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.e, self.theta1, self.theta2, self.phi]
    }

    pub(crate) fn check_away_from_goal(&self) -> Result<()> {
        if self.e < E_SINGULAR || !self.e.is_finite() {
            Err(Error::AtGoal { e: self.e })
        } else {
            Ok(())
        }
    }
}

/// Linear velocity `v` (m/s) and articulation rate `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    pub v: f64,
    pub omega: f64,
}

impl ControlCommand {
    pub const ZERO: ControlCommand = ControlCommand { v: 0.0, omega: 0.0 };

    pub fn new(v: f64, omega: f64) -> Result<Self> {
        Ok(Self {
            v: ensure_finite("v", v)?,
            omega: ensure_finite("omega", omega)?,
        })
    }

    /// Symmetric clamps on either channel; `None` leaves the channel untouched.
    pub fn saturate(self, v_max: Option<f64>, omega_max: Option<f64>) -> Self {
        let clamp = |x: f64, lim: Option<f64>| match lim {
            Some(m) => x.clamp(-m, m),
            None => x,
        };
        Self {
            v: clamp(self.v, v_max),
            omega: clamp(self.omega, omega_max),
        }
    }
}

/// Converts a Cartesian state to the polar error coordinates.
pub fn polar_from_cartesian(s: &CartesianState) -> Result<PolarState> {
    let e = s.x.hypot(s.y);
    if !(e >= E_SINGULAR) {
        return Err(Error::AtGoal { e });
    }
    let theta1 = (-s.y).atan2(-s.x);
    Ok(PolarState {
        e,
        theta1,
        theta2: wrap(theta1 - s.psi),
        phi: s.phi,
    })
}

pub fn cartesian_from_polar(p: &PolarState) -> CartesianState {
    CartesianState {
        x: -p.e * p.theta1.cos(),
        y: -p.e * p.theta1.sin(),
        psi: wrap(p.theta1 - p.theta2),
        phi: p.phi,
    }
}

/// `(dx, dy, dpsi, dphi)` for the given command.
pub fn cartesian_derivative(
    s: &CartesianState,
    u: &ControlCommand,
    geom: &RobotGeometry,
) -> Result<Rates> {
    let factor = articulation_factor(s.phi, geom)?;
    Ok([
        u.v * s.psi.cos(),
        u.v * s.psi.sin(),
        s.phi.sin() / factor * u.v + geom.l2 / factor * u.omega,
        u.omega,
    ])
}

/// `(de, dtheta1, dtheta2, dphi)` for the given command.
pub fn polar_derivative(p: &PolarState, u: &ControlCommand, geom: &RobotGeometry) -> Result<Rates> {
    p.check_away_from_goal()?;
    let factor = articulation_factor(p.phi, geom)?;
    let (sin2, cos2) = p.theta2.sin_cos();
    Ok([
        -u.v * cos2,
        u.v * sin2 / p.e,
        (sin2 / p.e - p.phi.sin() / factor) * u.v - geom.l2 / factor * u.omega,
        u.omega,
    ])
}
