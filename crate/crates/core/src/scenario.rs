//! JSON scenario files.
//!
//! ```json
//! {
//!   "geometry": { "l1": 0.1, "l2": 0.1 },
//!   "gains": { "lambda1": 1.0, "lambda2": 1.0, "lambda3": 1.0, "lambda4": 0.01 },
//!   "initial_conditions": [[5.0, -0.7853981633974483, -0.7853981633974483, 0.0]],
//!   "simulation": { "dt": 0.01, "t_max": 100.0 },
//!   "feedback": { "mode": "ground_truth" },
//!   "output": { "directory": "out", "formats": ["csv", "svg"] }
//! }
//! ```
//!
//! Every block is validated while it is deserialized, so schema and
//! invariant violations both carry the line and column of the offending
//! block. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{ControllerConfig, Gains};
use crate::model::{PolarState, RobotGeometry};
use crate::positioning::{BeaconArray, Point};
use crate::sim::{Feedback, Frame, Integrator, Job, SimulationConfig};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl ScenarioError {
    fn parse(path: &Path, source: serde_json::Error) -> Self {
        ScenarioError::Parse {
            path: path.to_path_buf(),
            line: source.line(),
            column: source.column(),
            source,
        }
    }
}

fn validated<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFields {
    l1: f64,
    l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryFields", into = "GeometryFields")]
pub struct GeometrySection(pub RobotGeometry);

impl TryFrom<GeometryFields> for GeometrySection {
    type Error = String;

    fn try_from(f: GeometryFields) -> Result<Self, String> {
        validated(RobotGeometry::new(f.l1, f.l2)).map(GeometrySection)
    }
}

impl From<GeometrySection> for GeometryFields {
    fn from(s: GeometrySection) -> Self {
        GeometryFields { l1: s.0.l1, l2: s.0.l2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsFields {
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    lambda4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GainsFields", into = "GainsFields")]
pub struct GainsSection(pub Gains);

impl TryFrom<GainsFields> for GainsSection {
    type Error = String;

    fn try_from(f: GainsFields) -> Result<Self, String> {
        validated(Gains::new(f.lambda1, f.lambda2, f.lambda3, f.lambda4)).map(GainsSection)
    }
}

impl From<GainsSection> for GainsFields {
    fn from(s: GainsSection) -> Self {
        let g = s.0;
        GainsFields { lambda1: g.lambda1, lambda2: g.lambda2, lambda3: g.lambda3, lambda4: g.lambda4 }
    }
}

/// Deadlock escape and saturation settings. Gains live in their own block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, try_from = "ControllerFields", into = "ControllerFields")]
pub struct ControllerSection {
    pub deadlock_eps: f64,
    pub kick_omega: f64,
    pub kick_phi_target: f64,
    pub deadlock_escape: bool,
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let d = ControllerConfig::default();
        Self {
            deadlock_eps: d.deadlock_eps,
            kick_omega: d.kick_omega,
            kick_phi_target: d.kick_phi_target,
            deadlock_escape: d.deadlock_escape,
            v_max: d.v_max,
            omega_max: d.omega_max,
        }
    }
}

impl ControllerSection {
    pub fn config(&self, gains: Gains) -> ControllerConfig {
        ControllerConfig {
            gains,
            deadlock_eps: self.deadlock_eps,
            kick_omega: self.kick_omega,
            kick_phi_target: self.kick_phi_target,
            deadlock_escape: self.deadlock_escape,
            v_max: self.v_max,
            omega_max: self.omega_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ControllerFields {
    deadlock_eps: f64,
    kick_omega: f64,
    kick_phi_target: f64,
    deadlock_escape: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    v_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_max: Option<f64>,
}

impl Default for ControllerFields {
    fn default() -> Self {
        ControllerSection::default().into()
    }
}

impl TryFrom<ControllerFields> for ControllerSection {
    type Error = String;

    fn try_from(f: ControllerFields) -> Result<Self, String> {
        let s = ControllerSection {
            deadlock_eps: f.deadlock_eps,
            kick_omega: f.kick_omega,
            kick_phi_target: f.kick_phi_target,
            deadlock_escape: f.deadlock_escape,
            v_max: f.v_max,
            omega_max: f.omega_max,
        };
        validated(s.config(Gains::default()).validate())?;
        Ok(s)
    }
}

impl From<ControllerSection> for ControllerFields {
    fn from(s: ControllerSection) -> Self {
        ControllerFields {
            deadlock_eps: s.deadlock_eps,
            kick_omega: s.kick_omega,
            kick_phi_target: s.kick_phi_target,
            deadlock_escape: s.deadlock_escape,
            v_max: s.v_max,
            omega_max: s.omega_max,
        }
    }
}

/// `(e, theta1, theta2, phi)`, angles wrapped on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct InitialCondition(pub PolarState);

impl TryFrom<[f64; 4]> for InitialCondition {
    type Error = String;

    fn try_from(v: [f64; 4]) -> Result<Self, String> {
        validated(PolarState::new(v[0], v[1], v[2], v[3])).map(InitialCondition)
    }
}

impl From<InitialCondition> for [f64; 4] {
    fn from(c: InitialCondition) -> Self {
        c.0.as_array()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameName {
    Cartesian,
    Polar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimulationFields {
    dt: f64,
    t_max: f64,
    e_tol: f64,
    angle_tol: f64,
    max_step: f64,
    integrator: IntegratorName,
    frame: FrameName,
}

impl Default for SimulationFields {
    fn default() -> Self {
        SimulationSection::default().into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SimulationFields", into = "SimulationFields")]
pub struct SimulationSection {
    pub dt: f64,
    pub t_max: f64,
    pub e_tol: f64,
    pub angle_tol: f64,
    pub max_step: f64,
    pub integrator: Integrator,
    pub frame: Frame,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimulationConfig::default();
        Self {
            dt: d.dt,
            t_max: d.t_max,
            e_tol: d.e_tol,
            angle_tol: d.angle_tol,
            max_step: d.max_step,
            integrator: d.integrator,
            frame: d.frame,
        }
    }
}

impl SimulationSection {
    pub fn config(&self, feedback: Feedback) -> SimulationConfig {
        SimulationConfig {
            dt: self.dt,
            t_max: self.t_max,
            e_tol: self.e_tol,
            angle_tol: self.angle_tol,
            max_step: self.max_step,
            feedback,
            integrator: self.integrator,
            frame: self.frame,
        }
    }
}

impl TryFrom<SimulationFields> for SimulationSection {
    type Error = String;

    fn try_from(f: SimulationFields) -> Result<Self, String> {
        let s = SimulationSection {
            dt: f.dt,
            t_max: f.t_max,
            e_tol: f.e_tol,
            angle_tol: f.angle_tol,
            max_step: f.max_step,
            integrator: match f.integrator {
                IntegratorName::Rk4 => Integrator::Rk4,
                IntegratorName::Euler => Integrator::Euler,
            },
            frame: match f.frame {
                FrameName::Cartesian => Frame::Cartesian,
                FrameName::Polar => Frame::Polar,
            },
        };
        validated(s.config(Feedback::GroundTruth).validate())?;
        Ok(s)
    }
}

impl From<SimulationSection> for SimulationFields {
    fn from(s: SimulationSection) -> Self {
        SimulationFields {
            dt: s.dt,
            t_max: s.t_max,
            e_tol: s.e_tol,
            angle_tol: s.angle_tol,
            max_step: s.max_step,
            integrator: match s.integrator {
                Integrator::Rk4 => IntegratorName::Rk4,
                Integrator::Euler => IntegratorName::Euler,
            },
            frame: match s.frame {
                Frame::Cartesian => FrameName::Cartesian,
                Frame::Polar => FrameName::Polar,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeaconFields {
    a: Point,
    b: Point,
    c: Point,
}

/// Beacon positions; also the format of the `triangulate --beacons` file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeaconFields", into = "BeaconFields")]
pub struct BeaconSection(pub BeaconArray);

impl Default for BeaconSection {
    /// Collinear beacons 0.2 m apart, 0.5 m ahead of the goal.
    fn default() -> Self {
        BeaconSection(
            BeaconArray::new([0.5, 0.2], [0.5, 0.0], [0.5, -0.2]).expect("valid default layout"),
        )
    }
}

impl TryFrom<BeaconFields> for BeaconSection {
    type Error = String;

    fn try_from(f: BeaconFields) -> Result<Self, String> {
        validated(BeaconArray::new(f.a, f.b, f.c)).map(BeaconSection)
    }
}

impl From<BeaconSection> for BeaconFields {
    fn from(s: BeaconSection) -> Self {
        BeaconFields { a: s.0.a(), b: s.0.b(), c: s.0.c() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeedbackSection {
    #[default]
    GroundTruth,
    #[serde(rename = "beacon")]
    Beacon {
        #[serde(default)]
        beacons: BeaconSection,
        #[serde(default, deserialize_with = "non_negative")]
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn non_negative<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(serde::de::Error::custom(format!("sigma must be non-negative, got {v}")))
    }
}

impl FeedbackSection {
    pub fn feedback(&self) -> Feedback {
        match *self {
            FeedbackSection::GroundTruth => Feedback::GroundTruth,
            FeedbackSection::Beacon { beacons, sigma, seed } => {
                Feedback::Beacon { beacons: beacons.0, sigma, seed }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![OutputFormat::Csv, OutputFormat::Svg] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFields {
    geometry: GeometrySection,
    gains: GainsSection,
    #[serde(default)]
    controller: ControllerSection,
    initial_conditions: Vec<InitialCondition>,
    #[serde(default)]
    simulation: SimulationSection,
    #[serde(default)]
    feedback: FeedbackSection,
    #[serde(default)]
    output: OutputSection,
}

/// A validated scenario with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFields", into = "ScenarioFields")]
pub struct ScenarioFile {
    pub geometry: RobotGeometry,
    pub gains: Gains,
    pub controller: ControllerSection,
    pub initial_conditions: Vec<PolarState>,
    pub simulation: SimulationSection,
    pub feedback: FeedbackSection,
    pub output: OutputSection,
}

impl TryFrom<ScenarioFields> for ScenarioFile {
    type Error = String;

    fn try_from(f: ScenarioFields) -> Result<Self, String> {
        if f.initial_conditions.is_empty() {
            return Err("initial_conditions must list at least one (e, theta1, theta2, phi)".into());
        }
        Ok(ScenarioFile {
            geometry: f.geometry.0,
            gains: f.gains.0,
            controller: f.controller,
            initial_conditions: f.initial_conditions.into_iter().map(|c| c.0).collect(),
            simulation: f.simulation,
            feedback: f.feedback,
            output: f.output,
        })
    }
}

impl From<ScenarioFile> for ScenarioFields {
    fn from(s: ScenarioFile) -> Self {
        ScenarioFields {
            geometry: GeometrySection(s.geometry),
            gains: GainsSection(s.gains),
            controller: s.controller,
            initial_conditions: s.initial_conditions.into_iter().map(InitialCondition).collect(),
            simulation: s.simulation,
            feedback: s.feedback,
            output: s.output,
        }
    }
}

impl ScenarioFile {
    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        self.simulation.config(self.feedback.feedback())
    }

    pub fn controller_config(&self) -> ControllerConfig {
        self.controller.config(self.gains)
    }

    /// One job per initial condition.
    pub fn jobs(&self) -> Vec<Job> {
        let sim = self.simulation_config();
        let controller = self.controller_config();
        self.initial_conditions
            .iter()
            .map(|initial| Job { initial: *initial, sim, controller, geometry: self.geometry })
            .collect()
    }

    /// Conditions that are accepted but deserve attention.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.geometry.l2 < self.geometry.l1 {
            out.push(format!(
                "l2 ({}) < l1 ({}): the articulation singularity l2 + l1 cos(phi) = 0 is reachable",
                self.geometry.l2, self.geometry.l1
            ));
        }
        out.extend(self.gains.warnings());
        out
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    ScenarioFile::from_json_str(&text).map_err(|e| ScenarioError::parse(path, e))
}

/// Reads a `{"a": [x, y], "b": [x, y], "c": [x, y]}` beacon file.
pub fn parse_beacons_file(path: impl AsRef<Path>) -> Result<BeaconArray, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str::<BeaconSection>(&text)
        .map(|s| s.0)
        .map_err(|e| ScenarioError::parse(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const MINIMAL: &str = r#"{
        "geometry": { "l1": 0.1, "l2": 0.1 },
        "gains": { "lambda1": 1, "lambda2": 1, "lambda3": 1, "lambda4": 0.01 },
        "initial_conditions": [[5, -0.7853981633974483, 3.141592653589793, 0]]
    }"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = ScenarioFile::from_json_str(MINIMAL).unwrap();
        assert_eq!(s.simulation_config(), SimulationConfig::default());
        assert_eq!(s.controller_config(), ControllerConfig::default());
        assert_eq!(s.initial_conditions[0].theta2, PI);
        assert_eq!(s.output, OutputSection::default());
        assert!(s.warnings().is_empty());
        assert_eq!(s.jobs().len(), 1);
    }

    #[test]
    fn invariant_violation_reports_location() {
        let text = MINIMAL.replace("\"lambda1\": 1", "\"lambda1\": 0");
        let err = ScenarioFile::from_json_str(&text).unwrap_err();
        assert_eq!(err.line(), 3);
        assert!(err.to_string().contains("lambda1 must be positive"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"l2\": 0.1", "\"l2\": 0.1, \"l3\": 0.2");
        let err = ScenarioFile::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("unknown field `l3`"), "{err}");
        assert_eq!(err.line(), 2);

        let text = MINIMAL.replacen('{', "{ \"extra\": 1,", 1);
        assert!(ScenarioFile::from_json_str(&text).is_err());
    }

    #[test]
    fn short_rear_body_parses_with_warning() {
        let text = MINIMAL.replace("\"l2\": 0.1", "\"l2\": 0.05");
        let s = ScenarioFile::from_json_str(&text).unwrap();
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn zero_lambda4_parses_with_warning() {
        let text = MINIMAL.replace("\"lambda4\": 0.01", "\"lambda4\": 0");
        let s = ScenarioFile::from_json_str(&text).unwrap();
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn empty_initial_conditions_rejected() {
        let text = r#"{
            "geometry": { "l1": 0.1, "l2": 0.1 },
            "gains": { "lambda1": 1, "lambda2": 1, "lambda3": 1, "lambda4": 0.01 },
            "initial_conditions": []
        }"#;
        assert!(ScenarioFile::from_json_str(text).is_err());
    }

    #[test]
    fn bad_simulation_and_feedback_blocks() {
        let with = |extra: &str| MINIMAL.replacen("\"geometry\"", &format!("{extra}, \"geometry\""), 1);
        assert!(ScenarioFile::from_json_str(&with(r#""simulation": {"dt": 0}"#)).is_err());
        assert!(ScenarioFile::from_json_str(&with(r#""simulation": {"integrator": "rk45"}"#)).is_err());
        assert!(ScenarioFile::from_json_str(&with(r#""feedback": {"mode": "beacon", "sigma": -1}"#)).is_err());
        assert!(ScenarioFile::from_json_str(&with(r#""feedback": {"mode": "lidar"}"#)).is_err());
        assert!(ScenarioFile::from_json_str(&with(r#""controller": {"kick_omega": 0}"#)).is_err());
        assert!(ScenarioFile::from_json_str(&with(
            r#""feedback": {"mode": "beacon", "beacons": {"a": [0, 0], "b": [0, 0], "c": [0, 1]}}"#
        ))
        .is_err());
        let s = ScenarioFile::from_json_str(&with(r#""feedback": {"mode": "beacon", "sigma": 0.001, "seed": 3}"#))
            .unwrap();
        assert!(matches!(s.simulation_config().feedback, Feedback::Beacon { seed: 3, .. }));
    }

    #[test]
    fn negative_distance_rejected() {
        let text = MINIMAL.replace("[[5,", "[[-5,");
        assert!(ScenarioFile::from_json_str(&text).is_err());
    }
}
