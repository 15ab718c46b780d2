//! Task (wrench) capability of cooperating manipulators that rigidly grasp
//! a shared object, with and without exploiting the counterbalance moment
//! that appears when the object force is applied away from its CoM.
//!
//! Module map:
//! - [`model`], [`config`]: scenario data, TOML files, built-in scenarios
//! - [`kinematics`]: planar chains, Jacobians, IK, object/EE coupling
//! - [`dynamics`]: arm inverse dynamics and desired object wrench
//! - [`grasp`]: grasp matrices and the counterbalance moment
//! - [`capability`]: capability LPs and the simplex solver
//! - [`runner`], [`export`]: trajectory runs and result files

pub mod capability;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod grasp;
pub mod kinematics;
pub mod model;
pub mod runner;

pub use capability::{
    capability_scalar, feasible_wrench_check, group_capability, group_capability_joint,
    CapabilityProblem, CapabilityStatus, GroupCapability, ScalarCapability, WrenchPolytope,
};
pub use config::{parse_scenario, reference_scenario, to_toml};
pub use error::{ConfigError, ExportError, GraspError, LpError, RunError};
pub use model::{
    BetaRule, ManipulatorModel, Mode, ObjectState, RigidObjectModel, ScenarioConfig,
    TrajectoryKind, TrajectorySpec, Wrench,
};
pub use runner::{run_scenario, CapabilitySample, Flag, RunResult, Summary};
