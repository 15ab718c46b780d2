//! Scenario files (TOML), validation, and the built-in reference scenario.
//!
//! Layout of a scenario document:
//!
//! ```toml
//! schema_version = 1
//! mode = "improved-fixed-alpha"   # baseline | improved-fixed-alpha | improved-joint
//! gravity = 9.8067                # optional
//! dt = 0.01                       # optional
//! cycles = 2                      # optional
//! unbounded_cap = 1e6             # optional
//! beta_rule = "proportional"      # optional: proportional | uniform
//! beta_iterations = 0             # optional
//! suppress_counterbalance = false # optional
//!
//! [trajectory]
//! kind = "circle"                 # circle | static-hold
//! center = [0.35, 0.0, 0.35]
//! radius = 0.05
//! angular_rate = 1.2566370614359172
//!
//! [object]
//! mass = 2.0
//! inertia = [[...], [...], [...]]
//! grasp_points = [[0.1, 0.0, 0.0], ...]
//!
//! [[manipulators]]
//! id = 1
//! base_position = [0.7, 0.0, 0.35]
//! joint_count = 3
//! link_lengths = [...]
//! # link_masses, link_com_offsets, link_inertias, torque_limits, velocity_limits
//! grasp_pitch = 3.141592653589793
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;

use crate::error::ConfigError;
use crate::model::*;

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_column(text, span.start),
            None => (0, 0),
        };
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate(&config)?;
    Ok(config)
}

pub fn to_toml(config: &ScenarioConfig) -> String {
    toml::to_string(config).expect("scenario config is always representable as TOML")
}

pub fn load_scenario(path: &std::path::Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

fn check_positive(name: &str, values: &[f64]) -> Result<(), ConfigError> {
    for (j, v) in values.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            return Err(invalid(format!("{name}[{j}] must be positive, got {v}")));
        }
    }
    Ok(())
}

pub fn validate_manipulator(m: &ManipulatorModel) -> Result<(), ConfigError> {
    let tag = format!("manipulator {}", m.id);
    if m.joint_count < 2 {
        return Err(invalid(format!("{tag}: joint_count must be at least 2")));
    }
    let n = m.joint_count;
    for (name, v) in [
        ("link_lengths", &m.link_lengths),
        ("link_masses", &m.link_masses),
        ("link_com_offsets", &m.link_com_offsets),
        ("link_inertias", &m.link_inertias),
        ("torque_limits", &m.torque_limits),
        ("velocity_limits", &m.velocity_limits),
    ] {
        if v.len() != n {
            return Err(invalid(format!(
                "{tag}: {name} has {} entries, joint_count is {n}",
                v.len()
            )));
        }
        check_positive(&format!("{tag}: {name}"), v)?;
    }
    for j in 0..n {
        if m.link_com_offsets[j] > m.link_lengths[j] {
            return Err(invalid(format!(
                "{tag}: link_com_offsets[{j}] exceeds link length"
            )));
        }
    }
    if !m.base_position.iter().all(|x| x.is_finite()) || !m.grasp_pitch.is_finite() {
        return Err(invalid(format!(
            "{tag}: base_position and grasp_pitch must be finite"
        )));
    }
    Ok(())
}

pub fn validate_object(o: &RigidObjectModel) -> Result<(), ConfigError> {
    if !(o.mass.is_finite() && o.mass > 0.0) {
        return Err(invalid("object mass must be positive"));
    }
    if o.grasp_points.is_empty() {
        return Err(invalid("object needs at least one grasp point"));
    }
    if !o.grasp_points.iter().flatten().all(|x| x.is_finite()) {
        return Err(invalid("grasp points must be finite"));
    }
    let inertia: Matrix3<f64> = o.inertia_matrix();
    if !inertia.iter().all(|x| x.is_finite()) {
        return Err(invalid("object inertia must be finite"));
    }
    let scale = inertia.abs().max().max(f64::MIN_POSITIVE);
    if (inertia - inertia.transpose()).abs().max() > 1e-12 * scale {
        return Err(invalid("object inertia must be symmetric"));
    }
    if inertia.cholesky().is_none() {
        return Err(invalid("object inertia must be positive definite"));
    }
    Ok(())
}

pub fn validate(c: &ScenarioConfig) -> Result<(), ConfigError> {
    if c.schema_version != SCHEMA_VERSION {
        return Err(invalid(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            c.schema_version
        )));
    }
    if !(c.dt.is_finite() && c.dt > 0.0) {
        return Err(invalid("dt must be positive"));
    }
    if c.cycles < 1 {
        return Err(invalid("cycles must be at least 1"));
    }
    if !c.gravity.is_finite() {
        return Err(invalid("gravity must be finite"));
    }
    if !(c.unbounded_cap.is_finite() && c.unbounded_cap > 0.0) {
        return Err(invalid("unbounded_cap must be positive"));
    }
    validate_object(&c.object)?;
    if c.manipulators.is_empty() {
        return Err(invalid("at least one manipulator is required"));
    }
    if c.manipulators.len() != c.object.grasp_points.len() {
        return Err(invalid(format!(
            "manipulator count ({}) must equal grasp point count ({})",
            c.manipulators.len(),
            c.object.grasp_points.len()
        )));
    }
    for m in &c.manipulators {
        validate_manipulator(m)?;
    }
    let t = &c.trajectory;
    if !t.center.iter().all(|x| x.is_finite()) || !t.pitch.is_finite() {
        return Err(invalid("trajectory center and pitch must be finite"));
    }
    if !(t.radius.is_finite() && t.radius >= 0.0) {
        return Err(invalid("trajectory radius must be non-negative"));
    }
    if !t.angular_rate.is_finite() {
        return Err(invalid("trajectory angular_rate must be finite"));
    }
    if t.kind == TrajectoryKind::Circle && t.angular_rate == 0.0 {
        return Err(invalid("circle trajectory needs a nonzero angular_rate"));
    }
    Ok(())
}

/// Placeholder link data for a three-joint arm shaped like the
/// OpenMANIPULATOR-X with its base joint locked: joint 2 to joint 3, joint 3
/// to joint 4, joint 4 to the gripper center. Masses are rounded vendor
/// figures, CoMs at mid-link, inertias from the slender-rod formula.
fn placeholder_arm(id: u32, base: [f64; 3], grasp_pitch: f64) -> ManipulatorModel {
    let link_lengths = vec![0.130, 0.124, 0.126];
    let link_masses = vec![0.1385, 0.1324, 0.1433];
    let link_com_offsets = link_lengths.iter().map(|l| 0.5 * l).collect();
    let link_inertias = link_lengths
        .iter()
        .zip(&link_masses)
        .map(|(l, m)| m * l * l / 12.0)
        .collect();
    ManipulatorModel {
        id,
        base_position: base,
        joint_count: 3,
        link_lengths,
        link_masses,
        link_com_offsets,
        link_inertias,
        torque_limits: vec![1.0; 3],
        velocity_limits: vec![4.8; 3],
        grasp_pitch,
        approximate: true,
    }
}

/// Four arms grasping a 2 kg plate at the midpoints of its edges, the plate
/// CoM following a 5 cm circle at 0.4*pi rad/s in the vertical X-Z plane.
pub fn reference_scenario() -> ScenarioConfig {
    let dimensions = [0.2, 0.02, 0.15];
    let mass = 2.0;
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: "reference".into(),
        gravity: DEFAULT_GRAVITY,
        dt: 0.01,
        cycles: 2,
        mode: Mode::ImprovedFixedAlpha,
        unbounded_cap: 1e6,
        beta_rule: BetaRule::Proportional,
        beta_iterations: 0,
        suppress_counterbalance: false,
        trajectory: TrajectorySpec {
            kind: TrajectoryKind::Circle,
            center: [0.35, 0.0, 0.35],
            radius: 0.05,
            angular_rate: 0.4 * PI,
            pitch: 0.0,
        },
        object: RigidObjectModel {
            mass,
            inertia: RigidObjectModel::cuboid_inertia(mass, dimensions),
            grasp_points: vec![
                [0.1, 0.0, 0.0],
                [0.0, 0.0, -0.075],
                [-0.1, 0.0, 0.0],
                [0.0, 0.0, 0.075],
            ],
            dimensions,
        },
        // each EE points from its base toward the plate edge it holds
        manipulators: vec![
            placeholder_arm(1, [0.7, 0.0, 0.35], PI),
            placeholder_arm(2, [0.35, 0.0, 0.0], FRAC_PI_2),
            placeholder_arm(3, [0.0, 0.0, 0.35], 0.0),
            placeholder_arm(4, [0.35, 0.0, 0.7], -FRAC_PI_2),
        ],
    }
}

/// Reference geometry with the object held still at the circle center.
pub fn static_hold_scenario() -> ScenarioConfig {
    let mut c = reference_scenario();
    c.name = "static-hold".into();
    c.trajectory.kind = TrajectoryKind::StaticHold;
    c.trajectory.radius = 0.0;
    c
}

/// Reference scenario with the bottom and top grasps moved 2.5 cm toward
/// -X along their edges, so the grasp set is no longer centered on the CoM.
pub fn asymmetric_scenario() -> ScenarioConfig {
    let mut c = reference_scenario();
    c.name = "asymmetric".into();
    c.object.grasp_points = vec![
        [0.1, 0.0, 0.0],
        [-0.025, 0.0, -0.075],
        [-0.1, 0.0, 0.0],
        [-0.025, 0.0, 0.075],
    ];
    c
}
