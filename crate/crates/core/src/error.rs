use thiserror::Error;

/// Errors raised by the kinematic model, the controller and the beacon
/// positioning pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `l2 + l1 cos(phi)` vanished: the vehicle is folded back on itself.
    #[error("articulation singularity at phi = {phi} (l2 + l1 cos phi = {factor:e}): robot fully folded")]
    ArticulationSingularity { phi: f64, factor: f64 },

    /// The polar angles are undefined at the goal.
    #[error("at-goal singularity: e = {e:e} is below the guard")]
    AtGoal { e: f64 },

    #[error("degenerate beacon geometry: {0}")]
    DegenerateGeometry(String),

    /// Robot on the circumcircle of the three beacons.
    #[error("indeterminate resection: robot lies on the beacons' circumcircle")]
    IndeterminateConfiguration,

    #[error("inconsistent bearing measurement: {0}")]
    InconsistentMeasurement(String),
}

impl Error {
    /// True for the kinematic singularities (goal or articulation).
    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::ArticulationSingularity { .. } | Error::AtGoal { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(what: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite, got {value}")))
    }
}
