//! Time-stepped evaluation of group capability along the object trajectory.
//!
//! Per step: object state, desired object wrench, per-arm joint motion
//! (analytic IK plus differential IK), self-motion torques, Jacobians, then
//! the plain capabilities, wrench shares, counterbalance moment and the
//! improved capabilities.
//!
//! Joint paths are resolved in a sequential pre-pass so that IK branches
//! stay continuous; the steps themselves are then evaluated in parallel.

use std::f64::consts::TAU;

use nalgebra::{DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capability::{
    group_capability, CapabilityProblem, CapabilityStatus, GroupCapability, WrenchPolytope,
};
use crate::config::validate;
use crate::dynamics::{inverse_dynamics, object_desired_wrench};
use crate::error::RunError;
use crate::grasp::{
    allocate_proportional, balance_residual, counterbalance_moment, AllocationWeights, GraspMap,
};
use crate::kinematics::{
    differential_ik, ee_accel_from_object, ee_pose_from_object, ee_twist_from_object, ik_planar3r,
    jacobian, joint_positions, planar_rotation, JointState, Pose,
};
use crate::model::{
    BetaRule, Mode, ObjectState, ScenarioConfig, TrajectoryKind, TrajectorySpec, Wrench,
    SCHEMA_VERSION,
};

/// Environment variable bounding worker threads (0 or unset: automatic).
pub const THREADS_ENV: &str = "COOPWRENCH_THREADS";

const BETA_TOLERANCE: f64 = 1e-6;
const BALANCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    SingularDamped,
    CapabilityUnbounded,
    Infeasible,
    VelocityLimit,
    ZeroCapability,
    BalanceViolation,
}

impl Flag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flag::SingularDamped => "singular-damped",
            Flag::CapabilityUnbounded => "capability-unbounded",
            Flag::Infeasible => "infeasible",
            Flag::VelocityLimit => "velocity-limit",
            Flag::ZeroCapability => "zero-capability",
            Flag::BalanceViolation => "balance-violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilitySample {
    pub time: f64,
    /// Per-arm capability of the configured mode.
    pub k: Vec<f64>,
    /// Per-arm capability without counterbalance exploitation.
    pub k_plain: Vec<f64>,
    #[serde(rename = "K0")]
    pub k0_total: f64,
    #[serde(rename = "K1")]
    pub k1_total: f64,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub t_delta: [f64; 3],
    pub balance_residual: f64,
    /// Sorted, no duplicates.
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl SeriesStats {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let mut n = 0usize;
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for v in values {
            n += 1;
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        (n > 0).then(|| SeriesStats {
            min,
            mean: sum / n as f64,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(rename = "K0")]
    pub k0: Option<SeriesStats>,
    #[serde(rename = "K1")]
    pub k1: Option<SeriesStats>,
    /// `(mean K1 - mean K0) / mean K0 * 100`
    pub improvement_percent: Option<f64>,
    pub flagged_steps: usize,
}

impl Summary {
    pub fn from_samples(samples: &[CapabilitySample]) -> Self {
        let k0 = SeriesStats::of(samples.iter().map(|s| s.k0_total));
        let k1 = SeriesStats::of(samples.iter().map(|s| s.k1_total));
        let improvement_percent = match (k0, k1) {
            (Some(a), Some(b)) if a.mean != 0.0 => Some((b.mean - a.mean) / a.mean * 100.0),
            _ => None,
        };
        Self {
            k0,
            k1,
            improvement_percent,
            flagged_steps: samples.iter().filter(|s| !s.flags.is_empty()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub samples: Vec<CapabilitySample>,
    pub summary: Summary,
}

impl RunResult {
    pub fn new(config: ScenarioConfig, samples: Vec<CapabilitySample>) -> Self {
        let summary = Summary::from_samples(&samples);
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            samples,
            summary,
        }
    }
}

/// Object state on the prescribed path, differentiated analytically.
pub fn evaluate_trajectory(spec: &TrajectorySpec, t: f64) -> ObjectState {
    let center = Vector3::from(spec.center);
    let mut state = ObjectState::at_rest(center);
    state.orientation = planar_rotation(spec.pitch);
    if spec.kind == TrajectoryKind::Circle {
        let (r, w) = (spec.radius, spec.angular_rate);
        let (s, c) = (w * t).sin_cos();
        state.position = center + Vector3::new(r * c, 0.0, r * s);
        state.linear_velocity = Vector3::new(-r * w * s, 0.0, r * w * c);
        state.linear_accel = Vector3::new(-r * w * w * c, 0.0, -r * w * w * s);
    }
    state
}

/// Number of samples for `cycles` periods at step `dt`, both ends included.
pub fn sample_count(config: &ScenarioConfig) -> usize {
    let duration = config.cycles as f64 * config.trajectory.period();
    (duration / config.dt).round() as usize + 1
}

pub fn ee_target(config: &ScenarioConfig, arm: usize, state: &ObjectState) -> Pose {
    let grasp = config.object.grasp_point(arm);
    let pose = ee_pose_from_object(state, &grasp);
    Pose {
        position: pose.position,
        orientation: pose.orientation * planar_rotation(config.manipulators[arm].grasp_pitch),
    }
}

/// Shifts each angle by whole turns to lie nearest the reference.
fn unwrap_near(q: &DVector<f64>, reference: &DVector<f64>) -> DVector<f64> {
    q.zip_map(reference, |a, r| a + ((r - a) / TAU).round() * TAU)
}

/// Joint positions of every arm at every step. At the first step the
/// branch with the elbow farthest from the object CoM is taken; later steps
/// take the solution nearest the previous one.
pub fn joint_paths(
    config: &ScenarioConfig,
    times: &[f64],
) -> Result<Vec<Vec<DVector<f64>>>, RunError> {
    let mut paths: Vec<Vec<DVector<f64>>> = Vec::with_capacity(times.len());
    for (step, &t) in times.iter().enumerate() {
        let state = evaluate_trajectory(&config.trajectory, t);
        let mut row = Vec::with_capacity(config.manipulators.len());
        for (i, model) in config.manipulators.iter().enumerate() {
            let target = ee_target(config, i, &state);
            let solutions = ik_planar3r(model, &target);
            let chosen = match paths.last() {
                None => solutions.into_iter().max_by(|a, b| {
                    let da = (joint_positions(model, a)[1] - state.position).norm();
                    let db = (joint_positions(model, b)[1] - state.position).norm();
                    da.total_cmp(&db)
                }),
                Some(prev) => solutions
                    .into_iter()
                    .map(|s| unwrap_near(&s, &prev[i]))
                    .min_by(|a, b| (a - &prev[i]).norm().total_cmp(&(b - &prev[i]).norm())),
            };
            match chosen {
                Some(q) => row.push(q),
                None => {
                    return Err(RunError::Unreachable {
                        step,
                        arm: model.id,
                        target: target.position.into(),
                    })
                }
            }
        }
        paths.push(row);
    }
    Ok(paths)
}

struct ArmStep {
    polytope: WrenchPolytope,
    damped: bool,
    over_speed: bool,
}

fn flag_statuses(flags: &mut Vec<Flag>, group: &GroupCapability) {
    for s in &group.status {
        match s {
            CapabilityStatus::Bounded => {}
            CapabilityStatus::Unbounded => flags.push(Flag::CapabilityUnbounded),
            CapabilityStatus::Infeasible => flags.push(Flag::Infeasible),
        }
    }
}

fn shares(config: &ScenarioConfig, k: &[f64], flags: &mut Vec<Flag>) -> Vec<f64> {
    let n = k.len();
    match config.beta_rule {
        BetaRule::Uniform => vec![1.0 / n as f64; n],
        BetaRule::Proportional => allocate_proportional(k).unwrap_or_else(|_| {
            flags.push(Flag::ZeroCapability);
            vec![1.0 / n as f64; n]
        }),
    }
}

/// Capability sample at time `t` with the arms at joint positions `qs`.
pub fn evaluate_step(config: &ScenarioConfig, t: f64, qs: &[DVector<f64>]) -> CapabilitySample {
    let state = evaluate_trajectory(&config.trajectory, t);
    let h_d = object_desired_wrench(&config.object, &state, config.gravity);
    let map = GraspMap::from_object(&config.object, &state);
    let cap = config.unbounded_cap;

    let arms: Vec<ArmStep> = config
        .manipulators
        .iter()
        .zip(qs)
        .enumerate()
        .map(|(i, (model, q))| {
            let grasp = config.object.grasp_point(i);
            let dik = differential_ik(
                model,
                q,
                &ee_twist_from_object(&state, &grasp),
                &ee_accel_from_object(&state, &grasp),
            );
            let over_speed = dik
                .qdot
                .iter()
                .zip(&model.velocity_limits)
                .any(|(v, lim)| v.abs() > *lim);
            let joint = JointState {
                q: q.clone(),
                qdot: dik.qdot,
                qddot: dik.qddot,
            };
            ArmStep {
                polytope: WrenchPolytope {
                    jacobian: jacobian(model, q),
                    tau_prime: inverse_dynamics(model, &joint, config.gravity),
                    tau_max: DVector::from_column_slice(&model.torque_limits),
                },
                damped: dik.damped,
                over_speed,
            }
        })
        .collect();

    let mut flags = Vec::new();
    if arms.iter().any(|a| a.damped) {
        flags.push(Flag::SingularDamped);
    }
    if arms.iter().any(|a| a.over_speed) {
        flags.push(Flag::VelocityLimit);
    }

    let plain_problems: Vec<CapabilityProblem> = arms
        .iter()
        .map(|a| a.polytope.problem(&h_d, &Wrench::zero()))
        .collect();
    let n = arms.len();
    let plain = group_capability(
        &plain_problems,
        Mode::Baseline,
        &AllocationWeights::uniform(n),
        cap,
    );
    flag_statuses(&mut flags, &plain);

    let mut beta = shares(config, &plain.k, &mut flags);
    let mut iteration = 0;
    let (improved, t_delta, h_delta) = loop {
        let (t_delta, h_delta) = if config.suppress_counterbalance {
            (Vector3::zeros(), Wrench::zero())
        } else {
            let cb = counterbalance_moment(&beta, &map, &h_d.force);
            (cb.t_delta, cb.h_delta)
        };
        let improved = match config.mode {
            Mode::Baseline => plain.clone(),
            mode => {
                let problems: Vec<CapabilityProblem> = arms
                    .iter()
                    .zip(&plain_problems)
                    .map(|(a, p)| p.with_delta(&a.polytope.jacobian, &h_delta))
                    .collect();
                group_capability(
                    &problems,
                    mode,
                    &AllocationWeights::matched(beta.clone()),
                    cap,
                )
            }
        };
        if config.mode == Mode::Baseline || iteration >= config.beta_iterations {
            break (improved, t_delta, h_delta);
        }
        iteration += 1;
        let mut scratch = Vec::new();
        let next = shares(config, &improved.k, &mut scratch);
        let change = next
            .iter()
            .zip(&beta)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !scratch.is_empty() || change < BETA_TOLERANCE {
            break (improved, t_delta, h_delta);
        }
        beta = next;
    };
    if config.mode != Mode::Baseline {
        flag_statuses(&mut flags, &improved);
    }

    let audit_alpha = match config.mode {
        Mode::Baseline => beta.clone(),
        _ => improved.alpha.clone(),
    };
    let residual = balance_residual(
        &map,
        &AllocationWeights {
            beta: beta.clone(),
            alpha: audit_alpha,
        },
        &h_d,
        &h_delta,
    );
    if residual > BALANCE_TOLERANCE {
        flags.push(Flag::BalanceViolation);
    }
    flags.sort();
    flags.dedup();

    CapabilitySample {
        time: t,
        k: improved.k.clone(),
        k_plain: plain.k.clone(),
        k0_total: plain.total,
        k1_total: improved.total,
        beta,
        alpha: improved.alpha,
        t_delta: t_delta.into(),
        balance_residual: residual,
        flags,
    }
}

fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult, RunError> {
    validate(config)?;
    for m in &config.manipulators {
        if m.joint_count != 3 {
            return Err(RunError::Unsupported {
                arm: m.id,
                reason: format!(
                    "trajectory tracking needs 3 joints, model has {}",
                    m.joint_count
                ),
            });
        }
    }
    let times: Vec<f64> = (0..sample_count(config))
        .map(|i| i as f64 * config.dt)
        .collect();
    let paths = joint_paths(config, &times)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let samples = pool.install(|| {
        times
            .par_iter()
            .zip(paths.par_iter())
            .map(|(t, qs)| evaluate_step(config, *t, qs))
            .collect()
    });
    Ok(RunResult::new(config.clone(), samples))
}
