//! Lyapunov parking law.
//!
//! With `V = ½λ₁e² + ½λ₂θ₁² + ½λ₃θ₂² + ½λ₄φ²` the polar kinematics give
//! `dV/dt = A·v + B·ω`. Choosing `v = -A` and `ω = -B` makes
//! `dV/dt = -(v² + ω²) ≤ 0`.
//!
//! When `θ₂ = φ = 0` the law degenerates to `v = λ₁e`, `ω = 0` and has no
//! authority over `θ₁`. [`control_with_deadlock_handling`] detects this and
//! bends the articulation joint before handing back to the law.

use crate::error::{ensure_finite, Error, Result};
use crate::model::{articulation_factor, ControlCommand, PolarState, RobotGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl Gains {
    /// `λ₁..λ₃ > 0`, `λ₄ ≥ 0`. A zero `λ₄` is accepted but reported by
    /// [`Gains::warnings`].
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, lambda4: f64) -> Result<Self> {
        for (name, value) in [("lambda1", lambda1), ("lambda2", lambda2), ("lambda3", lambda3)] {
            ensure_finite(name, value)?;
            if value <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {value}")));
            }
        }
        ensure_finite("lambda4", lambda4)?;
        if lambda4 < 0.0 {
            return Err(Error::InvalidInput(format!(
                "lambda4 must be non-negative, got {lambda4}"
            )));
        }
        Ok(Self { lambda1, lambda2, lambda3, lambda4 })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lambda1: self.lambda1 * c,
            lambda2: self.lambda2 * c,
            lambda3: self.lambda3 * c,
            lambda4: self.lambda4 * c,
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.lambda4 == 0.0 {
            vec!["lambda4 = 0 leaves the body angle phi uncontrolled".to_string()]
        } else {
            Vec::new()
        }
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self { lambda1: 1.0, lambda2: 1.0, lambda3: 1.0, lambda4: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub gains: Gains,
    /// Half-width of the deadlock band on `θ₂`, `φ` and `θ₁` (rad).
    pub deadlock_eps: f64,
    /// Magnitude of the articulation rate used to escape a deadlock (rad/s).
    pub kick_omega: f64,
    /// The escape ends once `|φ|` reaches this value (rad).
    pub kick_phi_target: f64,
    /// When false the deadlock is left alone and the plain law is applied.
    pub deadlock_escape: bool,
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
}

impl ControllerConfig {
    pub fn new(gains: Gains) -> Self {
        Self { gains, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.gains;
        Gains::new(g.lambda1, g.lambda2, g.lambda3, g.lambda4)?;
        if !(self.deadlock_eps > 0.0) || !self.deadlock_eps.is_finite() {
            return Err(Error::InvalidInput(format!(
                "deadlock_eps must be positive, got {}",
                self.deadlock_eps
            )));
        }
        if self.kick_omega == 0.0 || !self.kick_omega.is_finite() {
            return Err(Error::InvalidInput(format!(
                "kick_omega must be non-zero and finite, got {}",
                self.kick_omega
            )));
        }
        if !(self.kick_phi_target > self.deadlock_eps) || !self.kick_phi_target.is_finite() {
            return Err(Error::InvalidInput(format!(
                "kick_phi_target ({}) must exceed deadlock_eps ({})",
                self.kick_phi_target, self.deadlock_eps
            )));
        }
        for (name, limit) in [("v_max", self.v_max), ("omega_max", self.omega_max)] {
            if let Some(m) = limit {
                if !(m > 0.0) || !m.is_finite() {
                    return Err(Error::InvalidInput(format!("{name} must be positive, got {m}")));
                }
            }
        }
        Ok(())
    }
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gains: Gains::default(),
            deadlock_eps: 1e-3,
            kick_omega: 0.1,
            kick_phi_target: 0.05,
            deadlock_escape: true,
            v_max: None,
            omega_max: None,
        }
    }
}

/// Which branch produced a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Normal,
    Kick,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Normal => "NORMAL",
            Mode::Kick => "KICK",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "NORMAL" => Ok(Mode::Normal),
            "KICK" => Ok(Mode::Kick),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

pub fn lyapunov_value(p: &PolarState, g: &Gains) -> f64 {
    0.5 * (g.lambda1 * p.e * p.e
        + g.lambda2 * p.theta1 * p.theta1
        + g.lambda3 * p.theta2 * p.theta2
        + g.lambda4 * p.phi * p.phi)
}

/// The stabilizing law, without saturation.
pub fn control_law(p: &PolarState, g: &Gains, geom: &RobotGeometry) -> Result<ControlCommand> {
    p.check_away_from_goal()?;
    let factor = articulation_factor(p.phi, geom)?;
    let (sin2, cos2) = p.theta2.sin_cos();
    // sin(θ₂)/e is evaluated as written.
    let v_coeff = (g.lambda2 * p.theta1 + g.lambda3 * p.theta2) * sin2 / p.e
        - g.lambda1 * p.e * cos2
        - g.lambda3 * p.theta2 * p.phi.sin() / factor;
    let omega_coeff = g.lambda4 * p.phi - geom.l2 * g.lambda3 * p.theta2 / factor;
    Ok(ControlCommand { v: -v_coeff, omega: -omega_coeff })
}

/// `dV/dt` along the unsaturated closed loop, `-(v² + ω²)`.
pub fn closed_loop_vdot(p: &PolarState, g: &Gains, geom: &RobotGeometry) -> Result<f64> {
    let u = control_law(p, g, geom)?;
    Ok(-(u.v * u.v + u.omega * u.omega))
}

pub fn detect_deadlock(p: &PolarState, cfg: &ControllerConfig) -> bool {
    let eps = cfg.deadlock_eps;
    p.theta2.abs() < eps && p.phi.abs() < eps && p.theta1.abs() >= eps
}

/// Applies the law, or the articulation kick while a deadlock is being escaped.
///
/// `previous` is the mode of the preceding control update; an active kick
/// continues until `|φ| ≥ kick_phi_target`. Saturation is applied last.
pub fn control_with_deadlock_handling(
    p: &PolarState,
    cfg: &ControllerConfig,
    geom: &RobotGeometry,
    previous: Mode,
) -> Result<(ControlCommand, Mode)> {
    let kicking = cfg.deadlock_escape
        && (detect_deadlock(p, cfg)
            || (previous == Mode::Kick && p.phi.abs() < cfg.kick_phi_target));
    let (u, mode) = if kicking {
        p.check_away_from_goal()?;
        // A positive body angle ends up driving θ₁ down once the law resumes.
        let sign = if p.theta1 >= 0.0 { 1.0 } else { -1.0 };
        (ControlCommand { v: 0.0, omega: sign * cfg.kick_omega.abs() }, Mode::Kick)
    } else {
        (control_law(p, &cfg.gains, geom)?, Mode::Normal)
    };
    Ok((u.saturate(cfg.v_max, cfg.omega_max), mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn state(e: f64, t1: f64, t2: f64, phi: f64) -> PolarState {
        PolarState::new(e, t1, t2, phi).unwrap()
    }

    #[test]
    fn gains_validation() {
        assert!(Gains::new(0.0, 1.0, 1.0, 0.01).is_err());
        assert!(Gains::new(1.0, -1.0, 1.0, 0.01).is_err());
        assert!(Gains::new(1.0, 1.0, 1.0, -0.01).is_err());
        let g = Gains::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(g.warnings().len(), 1);
        assert!(Gains::default().warnings().is_empty());
    }

    #[test]
    fn controller_config_validation() {
        assert!(ControllerConfig::default().validate().is_ok());
        let bad = ControllerConfig { kick_omega: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig { kick_phi_target: 1e-4, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig { deadlock_eps: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig { v_max: Some(-1.0), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lyapunov_examples() {
        let g = Gains::default();
        assert_eq!(lyapunov_value(&state(0.0, 0.0, 0.0, 0.0), &g), 0.0);
        let v = lyapunov_value(&state(5.0, -FRAC_PI_4, -FRAC_PI_4, 0.0), &g);
        assert_abs_diff_eq!(v, 13.11685, epsilon = 1e-5);
        let p = state(2.0, 0.3, -1.2, 0.7);
        assert_abs_diff_eq!(
            lyapunov_value(&p, &g.scaled(2.0)),
            2.0 * lyapunov_value(&p, &g),
            epsilon = 1e-12
        );
    }

    #[test]
    fn control_law_examples() {
        let g = Gains::default();
        let geom = RobotGeometry::default();
        let u = control_law(&state(1.0, 0.0, 0.0, 0.0), &g, &geom).unwrap();
        assert_eq!((u.v, u.omega), (1.0, 0.0));

        let u = control_law(&state(5.0, -FRAC_PI_4, -FRAC_PI_4, 0.0), &g, &geom).unwrap();
        assert_abs_diff_eq!(u.v, 3.313390, epsilon = 1e-6);
        assert_abs_diff_eq!(u.omega, -FRAC_PI_8, epsilon = 1e-12);

        let u = control_law(&state(5.0, -FRAC_PI_4, PI, 0.0), &g, &geom).unwrap();
        assert_abs_diff_eq!(u.v, -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.omega, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn control_law_guards() {
        let g = Gains::default();
        let geom = RobotGeometry::default();
        assert!(matches!(
            control_law(&state(0.0, 0.1, 0.1, 0.0), &g, &geom),
            Err(Error::AtGoal { .. })
        ));
        assert!(matches!(
            control_law(&state(1.0, 0.1, 0.1, PI), &g, &geom),
            Err(Error::ArticulationSingularity { .. })
        ));
    }

    #[test]
    fn vdot_examples() {
        let g = Gains::default();
        let geom = RobotGeometry::default();
        assert_eq!(closed_loop_vdot(&state(1.0, 0.0, 0.0, 0.0), &g, &geom).unwrap(), -1.0);
        let vd = closed_loop_vdot(&state(5.0, -FRAC_PI_4, PI, 0.0), &g, &geom).unwrap();
        assert_abs_diff_eq!(vd, -27.467401, epsilon = 1e-6);
    }

    #[test]
    fn deadlock_detection() {
        let cfg = ControllerConfig::default();
        assert!(detect_deadlock(&state(5.0, FRAC_PI_2, 0.0, 0.0), &cfg));
        assert!(!detect_deadlock(&state(5.0, FRAC_PI_2, 0.5, 0.0), &cfg));
        assert!(!detect_deadlock(&state(5.0, 0.0, 0.0, 0.0), &cfg));
    }

    #[test]
    fn deadlock_handling_modes() {
        let cfg = ControllerConfig::default();
        let geom = RobotGeometry::default();
        let (u, mode) =
            control_with_deadlock_handling(&state(5.0, FRAC_PI_2, 0.0, 0.0), &cfg, &geom, Mode::Normal)
                .unwrap();
        assert_eq!(mode, Mode::Kick);
        assert_eq!((u.v, u.omega), (0.0, 0.1));

        // Negative θ₁ kicks the other way.
        let (u, _) =
            control_with_deadlock_handling(&state(5.0, -1.0, 0.0, 0.0), &cfg, &geom, Mode::Normal)
                .unwrap();
        assert_eq!(u.omega, -0.1);

        // An ongoing kick continues below the target and stops beyond it.
        let mid = state(5.0, FRAC_PI_2, 0.0, 0.02);
        let (_, mode) = control_with_deadlock_handling(&mid, &cfg, &geom, Mode::Kick).unwrap();
        assert_eq!(mode, Mode::Kick);
        let (_, mode) = control_with_deadlock_handling(&mid, &cfg, &geom, Mode::Normal).unwrap();
        assert_eq!(mode, Mode::Normal);
        let done = state(5.0, FRAC_PI_2, 0.0, 0.06);
        let (u, mode) = control_with_deadlock_handling(&done, &cfg, &geom, Mode::Kick).unwrap();
        assert_eq!(mode, Mode::Normal);
        assert_eq!(u, control_law(&done, &cfg.gains, &geom).unwrap());

        let p = state(5.0, -FRAC_PI_4, -FRAC_PI_4, 0.0);
        let (u, mode) = control_with_deadlock_handling(&p, &cfg, &geom, Mode::Normal).unwrap();
        assert_eq!(mode, Mode::Normal);
        assert_eq!(u, control_law(&p, &cfg.gains, &geom).unwrap());
    }

    #[test]
    fn escape_can_be_disabled() {
        let cfg = ControllerConfig { deadlock_escape: false, ..Default::default() };
        let geom = RobotGeometry::default();
        let (u, mode) =
            control_with_deadlock_handling(&state(5.0, FRAC_PI_2, 0.0, 0.0), &cfg, &geom, Mode::Normal)
                .unwrap();
        assert_eq!(mode, Mode::Normal);
        assert_eq!((u.v, u.omega), (5.0, 0.0));
    }

    #[test]
    fn saturation_applies_after_the_law() {
        let cfg = ControllerConfig { v_max: Some(1.0), omega_max: Some(0.2), ..Default::default() };
        let geom = RobotGeometry::default();
        let (u, _) =
            control_with_deadlock_handling(&state(5.0, -FRAC_PI_4, PI, 0.0), &cfg, &geom, Mode::Normal)
                .unwrap();
        assert_abs_diff_eq!(u.v, -1.0);
        assert_abs_diff_eq!(u.omega, 0.2);
    }
}
