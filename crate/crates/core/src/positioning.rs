//! Bearing-only localization from three beacons A, B, C at known positions in
//! the target frame.
//!
//! The robot measures the angles `alpha` (between A and B), `beta` (between C
//! and B) and the signed bearing `gamma` of B relative to its own heading. Two
//! law-of-sines relations in the triangles OAB and OCB fix the angle `zeta1`
//! at B between BO and BC and the range `d = |OB|`; the pose follows from the
//! line of sight to B.
//!
//! Bearings alone cannot tell the robot from its mirror image across BC, so
//! the robot is assumed to be on the approach side of the array (towards
//! negative x), and every solution is checked by re-synthesizing the bearings.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{wrap, CartesianState, PolarState, E_SINGULAR};

/// A point in the target frame (m).
pub type Point = [f64; 2];

const DEGENERATE_EPS: f64 = 1e-12;
const RECHECK_TOL: f64 = 1e-6;

fn direction(from: Point, to: Point) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn distance(p: Point, q: Point) -> f64 {
    (q[0] - p[0]).hypot(q[1] - p[1])
}

/// Robot position and heading in the target frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }
}

impl From<&CartesianState> for Pose {
    fn from(s: &CartesianState) -> Self {
        Self { x: s.x, y: s.y, theta: s.psi }
    }
}

/// Three beacons and the geometry derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeaconArray {
    a: Point,
    b: Point,
    c: Point,
    dist_ab: f64,
    dist_cb: f64,
    zeta3: f64,
    phi_b: f64,
    side: f64,
}

impl BeaconArray {
    pub fn new(a: Point, b: Point, c: Point) -> Result<Self> {
        for (name, p) in [("A", a), ("B", b), ("C", c)] {
            ensure_finite(name, p[0])?;
            ensure_finite(name, p[1])?;
        }
        let dist_ab = distance(a, b);
        let dist_cb = distance(c, b);
        if dist_ab < DEGENERATE_EPS || dist_cb < DEGENERATE_EPS || distance(a, c) < DEGENERATE_EPS {
            return Err(Error::DegenerateGeometry("beacons must be pairwise distinct".into()));
        }
        // +1 when the approach side (x -> -inf) is to the left of the ray B->C.
        let dy = c[1] - b[1];
        if dy.abs() < DEGENERATE_EPS * dist_cb.max(1.0) {
            return Err(Error::DegenerateGeometry(
                "line BC must not be parallel to the approach (x) axis".into(),
            ));
        }
        let side = dy.signum();
        let phi_b = direction(b, c);
        // Angle swept from ray BC to ray BA, turning towards the robot's side.
        let swept = (side * (direction(b, a) - phi_b)).rem_euclid(2.0 * PI);
        if swept < DEGENERATE_EPS {
            return Err(Error::DegenerateGeometry("A lies on the ray from B through C".into()));
        }
        Ok(Self { a, b, c, dist_ab, dist_cb, zeta3: PI - swept, phi_b, side })
    }

    pub fn a(&self) -> Point {
        self.a
    }

    pub fn b(&self) -> Point {
        self.b
    }

    pub fn c(&self) -> Point {
        self.c
    }

    /// `|AB|`.
    pub fn dist_ab(&self) -> f64 {
        self.dist_ab
    }

    /// `|CB|`.
    pub fn dist_cb(&self) -> f64 {
        self.dist_cb
    }

    /// Exterior angle at B; zero for collinear beacons.
    pub fn zeta3(&self) -> f64 {
        self.zeta3
    }

    /// Direction of the ray from B through C.
    pub fn phi_b(&self) -> f64 {
        self.phi_b
    }

    /// Y coordinate of B.
    pub fn h(&self) -> f64 {
        self.b[1]
    }

    /// `+1.0` if the robot side is counter-clockwise from the ray B->C, `-1.0` otherwise.
    pub fn side(&self) -> f64 {
        self.side
    }
}

/// `alpha`, `beta` are unsigned subtended angles; `gamma` is signed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingMeasurement {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationSolution {
    /// Angle at B between BO and BC.
    pub zeta1: f64,
    /// Range from the robot to B.
    pub d: f64,
    pub pose: Pose,
}

/// Error distance and the two polar angles recovered from a pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarConfig {
    pub e: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl PolarConfig {
    /// Completes the state with a separately measured body angle.
    pub fn with_phi(&self, phi: f64) -> PolarState {
        PolarState { e: self.e, theta1: self.theta1, theta2: self.theta2, phi: wrap(phi) }
    }
}

/// Bearings seen from `pose`.
pub fn bearings_from_pose(pose: &Pose, beacons: &BeaconArray) -> Result<BearingMeasurement> {
    let o = [pose.x, pose.y];
    for (name, p) in [("A", beacons.a), ("B", beacons.b), ("C", beacons.c)] {
        if distance(o, p) < DEGENERATE_EPS {
            return Err(Error::DegenerateGeometry(format!("robot coincides with beacon {name}")));
        }
    }
    let to_b = direction(o, beacons.b);
    Ok(BearingMeasurement {
        alpha: wrap(direction(o, beacons.a) - to_b).abs(),
        beta: wrap(direction(o, beacons.c) - to_b).abs(),
        gamma: wrap(to_b - pose.theta),
    })
}

fn check_subtended(m: &BearingMeasurement) -> Result<(f64, f64)> {
    let sa = m.alpha.sin();
    let sb = m.beta.sin();
    if !(sa.abs() >= DEGENERATE_EPS) || !(sb.abs() >= DEGENERATE_EPS) {
        return Err(Error::DegenerateGeometry(format!(
            "subtended angles too close to 0 or pi (alpha = {}, beta = {})",
            m.alpha, m.beta
        )));
    }
    Ok((sa, sb))
}

/// Angle at B between the rays to the robot and to C, in `[0, pi)`.
pub fn solve_zeta1(m: &BearingMeasurement, beacons: &BeaconArray) -> Result<f64> {
    let (sa, sb) = check_subtended(m)?;
    let (a, b) = (beacons.dist_ab, beacons.dist_cb);
    let shifted = beacons.zeta3 - m.alpha;
    let num = b * sa * sb - a * sb * shifted.sin();
    let den = a * sb * shifted.cos() - b * sa * m.beta.cos();
    if num.abs() < DEGENERATE_EPS && den.abs() < DEGENERATE_EPS {
        return Err(Error::IndeterminateConfiguration);
    }
    let zeta1 = num.atan2(den);
    // tan only fixes zeta1 modulo pi; the triangle angle is in [0, pi).
    Ok(if zeta1 < 0.0 { zeta1 + PI } else { zeta1 })
}

/// Range `|OB|` from the triangle OCB.
pub fn solve_range(m: &BearingMeasurement, zeta1: f64, beacons: &BeaconArray) -> Result<f64> {
    let sb = m.beta.sin();
    if !(sb.abs() >= DEGENERATE_EPS) {
        return Err(Error::DegenerateGeometry(format!("sin(beta) vanishes (beta = {})", m.beta)));
    }
    let d = beacons.dist_cb * (m.beta + zeta1).sin() / sb;
    if !(d > 0.0) {
        return Err(Error::InconsistentMeasurement(format!("non-positive range d = {d}")));
    }
    Ok(d)
}

/// Residuals of the two law-of-sines relations in triangles OAB and OCB.
pub fn law_of_sines_residuals(
    m: &BearingMeasurement,
    beacons: &BeaconArray,
    zeta1: f64,
    d: f64,
) -> (f64, f64) {
    let oab = beacons.dist_ab / m.alpha.sin() - d / (zeta1 + beacons.zeta3 - m.alpha).sin();
    let ocb = beacons.dist_cb / m.beta.sin() - d / (m.beta + zeta1).sin();
    (oab, ocb)
}

/// Recovers the robot pose from the three bearings.
pub fn pose_from_bearings(
    m: &BearingMeasurement,
    beacons: &BeaconArray,
) -> Result<TriangulationSolution> {
    for (name, v) in [("alpha", m.alpha), ("beta", m.beta), ("gamma", m.gamma)] {
        ensure_finite(name, v)?;
    }
    let zeta1 = solve_zeta1(m, beacons)?;
    let d = solve_range(m, zeta1, beacons)?;
    // Direction of the line of sight from the robot to B.
    let sight = wrap(beacons.phi_b + PI + beacons.side * zeta1);
    let pose = Pose {
        x: beacons.b[0] - d * sight.cos(),
        y: beacons.h() - d * sight.sin(),
        theta: wrap(sight - m.gamma),
    };
    let check = bearings_from_pose(&pose, beacons)?;
    let mismatch = (check.alpha - m.alpha).abs().max((check.beta - m.beta).abs());
    if !(mismatch <= RECHECK_TOL) {
        return Err(Error::InconsistentMeasurement(format!(
            "recovered pose reproduces the bearings only to {mismatch:e} rad"
        )));
    }
    Ok(TriangulationSolution { zeta1, d, pose })
}

/// `(e, theta1, theta2)` of a recovered pose, using the model's angle convention.
pub fn polar_config_from_pose(sol: &TriangulationSolution) -> Result<PolarConfig> {
    let Pose { x, y, theta } = sol.pose;
    let e = x.hypot(y);
    if !(e >= E_SINGULAR) {
        return Err(Error::AtGoal { e });
    }
    let theta1 = (-y).atan2(-x);
    Ok(PolarConfig { e, theta1, theta2: wrap(theta1 - theta) })
}

/// Adds independent zero-mean Gaussian noise to each angle.
///
/// The output is a pure function of `(m, sigma, seed)`. `sigma` must be
/// non-negative; zero returns `m` unchanged.
pub fn add_bearing_noise(m: &BearingMeasurement, sigma: f64, seed: u64) -> BearingMeasurement {
    assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be finite and >= 0, got {sigma}");
    if sigma == 0.0 {
        return *m;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated above");
    BearingMeasurement {
        alpha: m.alpha + normal.sample(&mut rng),
        beta: m.beta + normal.sample(&mut rng),
        gamma: m.gamma + normal.sample(&mut rng),
    }
}
