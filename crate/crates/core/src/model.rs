//! Scenario data model: arms, grasped object, trajectory and run settings.
//!
//! All quantities are SI. Angles are radians. The arms move in the world X-Z
//! plane; planar angles are measured from +X toward +Z.

use nalgebra::{Matrix3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

/// Current version of the scenario file layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Gravity magnitude used when a scenario does not state one.
pub const DEFAULT_GRAVITY: f64 = 9.8067;

/// Kinematic and dynamic description of one planar serial arm.
///
/// `base_position` is the position of the first actuated joint. Link `j`
/// runs from joint `j` to joint `j + 1`; the last link ends at the
/// end-effector grasp point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulatorModel {
    pub id: u32,
    pub base_position: [f64; 3],
    pub joint_count: usize,
    pub link_lengths: Vec<f64>,
    pub link_masses: Vec<f64>,
    /// Distance from the proximal joint to the link CoM, along the link.
    pub link_com_offsets: Vec<f64>,
    /// Inertia about the link CoM, about the axis normal to the motion plane.
    pub link_inertias: Vec<f64>,
    pub torque_limits: Vec<f64>,
    pub velocity_limits: Vec<f64>,
    /// Planar angle of the end-effector approach direction in the object
    /// frame. Rigid grasp: EE orientation = object orientation composed with
    /// this fixed rotation.
    #[serde(default)]
    pub grasp_pitch: f64,
    /// Set when the inertial/geometric parameters are placeholders.
    #[serde(default)]
    pub approximate: bool,
}

impl ManipulatorModel {
    pub fn base(&self) -> Vector3<f64> {
        Vector3::from(self.base_position)
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidObjectModel {
    pub mass: f64,
    /// Inertia tensor about the CoM in the body frame, row-major.
    pub inertia: [[f64; 3]; 3],
    /// Grasp points in the body frame, one per manipulator.
    pub grasp_points: Vec<[f64; 3]>,
    /// Bounding box, for documentation only.
    #[serde(default)]
    pub dimensions: [f64; 3],
}

impl RigidObjectModel {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let i = &self.inertia;
        Matrix3::new(
            i[0][0], i[0][1], i[0][2], i[1][0], i[1][1], i[1][2], i[2][0], i[2][1], i[2][2],
        )
    }

    pub fn grasp_point(&self, index: usize) -> Vector3<f64> {
        Vector3::from(self.grasp_points[index])
    }

    /// Uniform solid cuboid inertia about its centroid.
    pub fn cuboid_inertia(mass: f64, dims: [f64; 3]) -> [[f64; 3]; 3] {
        let [lx, ly, lz] = dims;
        let k = mass / 12.0;
        [
            [k * (ly * ly + lz * lz), 0.0, 0.0],
            [0.0, k * (lx * lx + lz * lz), 0.0],
            [0.0, 0.0, k * (lx * lx + ly * ly)],
        ]
    }
}

/// Stacked force/torque pair, world frame unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn pure_torque(torque: Vector3<f64>) -> Self {
        Self::new(Vector3::zeros(), torque)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self::new(v.fixed_rows::<3>(0).into(), v.fixed_rows::<3>(3).into())
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.torque);
        v
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.force * s, self.torque * s)
    }

    pub fn is_finite(&self) -> bool {
        self.force
            .iter()
            .chain(self.torque.iter())
            .all(|x| x.is_finite())
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;

    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

impl std::ops::Sub for Wrench {
    type Output = Wrench;

    fn sub(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force - rhs.force, self.torque - rhs.torque)
    }
}

/// Object CoM pose and its first two time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub position: Vector3<f64>,
    pub orientation: Matrix3<f64>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
    pub linear_accel: Vector3<f64>,
    pub angular_accel: Vector3<f64>,
}

impl ObjectState {
    /// Object at rest at `position` with identity orientation.
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            orientation: Matrix3::identity(),
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            linear_accel: Vector3::zeros(),
            angular_accel: Vector3::zeros(),
        }
    }

    pub fn twist(&self) -> Vector6<f64> {
        stack(&self.linear_velocity, &self.angular_velocity)
    }
}

pub(crate) fn stack(top: &Vector3<f64>, bottom: &Vector3<f64>) -> Vector6<f64> {
    let mut v = Vector6::zeros();
    v.fixed_rows_mut::<3>(0).copy_from(top);
    v.fixed_rows_mut::<3>(3).copy_from(bottom);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Circle,
    StaticHold,
}

/// Prescribed object CoM path. The circle lies in the X-Z plane:
/// `center + radius * [cos(rate t), 0, sin(rate t)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub center: [f64; 3],
    #[serde(default)]
    pub radius: f64,
    /// rad/s. For a static hold it only sets the cycle period (1 s if zero).
    #[serde(default)]
    pub angular_rate: f64,
    /// Fixed planar orientation of the object.
    #[serde(default)]
    pub pitch: f64,
}

impl TrajectorySpec {
    /// Duration of one cycle in seconds.
    pub fn period(&self) -> f64 {
        if self.angular_rate != 0.0 {
            std::f64::consts::TAU / self.angular_rate.abs()
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Capability without counterbalance exploitation only.
    Baseline,
    /// Counterbalance share fixed to the wrench share (alpha = beta).
    ImprovedFixedAlpha,
    /// Counterbalance shares chosen by a joint LP.
    ImprovedJoint,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::ImprovedFixedAlpha => "improved-fixed-alpha",
            Mode::ImprovedJoint => "improved-joint",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            // both K0 and K1 on the same states; K0 is always produced
            "improved-fixed-alpha" | "both" => Ok(Mode::ImprovedFixedAlpha),
            "improved-joint" => Ok(Mode::ImprovedJoint),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// How the wrench shares beta are derived from the first-pass capabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRule {
    #[default]
    Proportional,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_cycles")]
    pub cycles: u32,
    pub mode: Mode,
    #[serde(default = "default_unbounded_cap")]
    pub unbounded_cap: f64,
    #[serde(default)]
    pub beta_rule: BetaRule,
    /// Number of beta refinement passes after the first improved solve.
    #[serde(default)]
    pub beta_iterations: u32,
    /// Forces the counterbalance moment to zero (reduction studies).
    #[serde(default)]
    pub suppress_counterbalance: bool,
    pub trajectory: TrajectorySpec,
    pub object: RigidObjectModel,
    pub manipulators: Vec<ManipulatorModel>,
}

fn default_gravity() -> f64 {
    DEFAULT_GRAVITY
}

fn default_dt() -> f64 {
    0.01
}

fn default_cycles() -> u32 {
    2
}

fn default_unbounded_cap() -> f64 {
    1e6
}
