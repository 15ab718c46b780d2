//! Task capability of single arms and of the cooperating group.
//!
//! Arm `i` can support the desired object wrench `h_d` scaled by `k_i` as
//! long as every joint torque stays inside its limit:
//!
//! ```text
//! | tau'_i + k_i J_i^T h_d + alpha_i J_i^T h_delta | <= tau_max_i,   k_i >= 0
//! ```
//!
//! With `alpha_i` fixed this is a one-variable LP, solved exactly by
//! intersecting the per-joint intervals. When the counterbalance shares are
//! optimized together with the capabilities the group problem is a proper
//! LP and goes through [`simplex`].

pub mod simplex;

use nalgebra::{DVector, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::LpError;
use crate::grasp::AllocationWeights;
use crate::kinematics::Jacobian;
use crate::model::{Mode, Wrench};
use simplex::{simplex_solve, LinearProgram};

/// Torque-limit constraint data of one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityProblem {
    /// `J^T h_d`
    pub jt_hd: DVector<f64>,
    /// `J^T h_delta`
    pub jt_hdelta: DVector<f64>,
    pub tau_prime: DVector<f64>,
    pub tau_max: DVector<f64>,
}

impl CapabilityProblem {
    pub fn new(
        jacobian: &Jacobian,
        h_d: &Wrench,
        h_delta: &Wrench,
        tau_prime: DVector<f64>,
        tau_max: DVector<f64>,
    ) -> Self {
        let jt = jacobian.transpose();
        Self {
            jt_hd: &jt * h_d.to_vector(),
            jt_hdelta: &jt * h_delta.to_vector(),
            tau_prime,
            tau_max,
        }
    }

    pub fn joint_count(&self) -> usize {
        self.jt_hd.len()
    }

    /// Same arm with a different counterbalance wrench.
    pub fn with_delta(&self, jacobian: &Jacobian, h_delta: &Wrench) -> Self {
        Self {
            jt_hdelta: jacobian.transpose() * h_delta.to_vector(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapabilityStatus {
    Bounded,
    /// No joint limits the task direction; `k` was set to the cap.
    Unbounded,
    /// No `k >= 0` satisfies the limits; `k` was set to zero.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCapability {
    pub k: f64,
    pub status: CapabilityStatus,
}

/// Exact maximizer of the one-variable capability LP.
///
/// `alpha = None` is the plain capability; `Some(alpha_i)` adds the arm's
/// share of the counterbalance wrench to the torque offset.
pub fn capability_scalar(
    problem: &CapabilityProblem,
    alpha: Option<f64>,
    unbounded_cap: f64,
) -> ScalarCapability {
    let mut lo: f64 = 0.0;
    let mut hi = f64::INFINITY;
    let mut violated = false;
    for j in 0..problem.joint_count() {
        let c = match alpha {
            Some(a) => problem.tau_prime[j] + a * problem.jt_hdelta[j],
            None => problem.tau_prime[j],
        };
        let a = problem.jt_hd[j];
        let t = problem.tau_max[j];
        if a == 0.0 {
            violated |= c.abs() > t;
            continue;
        }
        let (l, u) = if a > 0.0 {
            ((-t - c) / a, (t - c) / a)
        } else {
            ((t - c) / a, (-t - c) / a)
        };
        lo = lo.max(l);
        hi = hi.min(u);
    }
    if violated || lo > hi {
        ScalarCapability {
            k: 0.0,
            status: CapabilityStatus::Infeasible,
        }
    } else if hi == f64::INFINITY {
        ScalarCapability {
            k: unbounded_cap,
            status: CapabilityStatus::Unbounded,
        }
    } else {
        ScalarCapability {
            k: hi,
            status: CapabilityStatus::Bounded,
        }
    }
}

/// The same one-variable problem posed to the simplex solver.
pub fn capability_scalar_lp(
    problem: &CapabilityProblem,
    alpha: Option<f64>,
) -> Result<f64, LpError> {
    let mut lp = LinearProgram::new(vec![1.0]);
    for j in 0..problem.joint_count() {
        let c = problem.tau_prime[j] + alpha.map_or(0.0, |a| a * problem.jt_hdelta[j]);
        let t = problem.tau_max[j];
        lp.add_row(vec![problem.jt_hd[j]], -t - c, t - c);
    }
    simplex_solve(&lp).map(|s| s.x[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupCapability {
    pub k: Vec<f64>,
    pub total: f64,
    /// Counterbalance shares actually used (zeros for the plain capability).
    pub alpha: Vec<f64>,
    pub status: Vec<CapabilityStatus>,
}

impl GroupCapability {
    fn from_scalars(results: Vec<ScalarCapability>, alpha: Vec<f64>) -> Self {
        let k: Vec<f64> = results.iter().map(|r| r.k).collect();
        Self {
            total: k.iter().sum(),
            status: results.iter().map(|r| r.status).collect(),
            k,
            alpha,
        }
    }
}

/// Capabilities of all arms. `Baseline` ignores the counterbalance wrench,
/// `ImprovedFixedAlpha` uses `weights.alpha`, `ImprovedJoint` optimizes the
/// counterbalance shares.
pub fn group_capability(
    problems: &[CapabilityProblem],
    mode: Mode,
    weights: &AllocationWeights,
    unbounded_cap: f64,
) -> GroupCapability {
    match mode {
        Mode::Baseline => GroupCapability::from_scalars(
            problems
                .iter()
                .map(|p| capability_scalar(p, None, unbounded_cap))
                .collect(),
            vec![0.0; problems.len()],
        ),
        Mode::ImprovedFixedAlpha => GroupCapability::from_scalars(
            problems
                .iter()
                .zip(&weights.alpha)
                .map(|(p, a)| capability_scalar(p, Some(*a), unbounded_cap))
                .collect(),
            weights.alpha.clone(),
        ),
        Mode::ImprovedJoint => group_capability_joint(problems, &weights.beta, unbounded_cap),
    }
}

/// Maximizes `sum k_i` over the capabilities and the counterbalance shares
/// together, subject to `sum alpha_i = 1`. Shares may be negative.
///
/// Each `k_i` is capped at `unbounded_cap`. If the joint problem has no
/// feasible point, every arm reports zero capability and `alpha = beta`.
pub fn group_capability_joint(
    problems: &[CapabilityProblem],
    beta: &[f64],
    unbounded_cap: f64,
) -> GroupCapability {
    let n = problems.len();
    let mut objective = vec![0.0; 2 * n];
    objective[..n].fill(1.0);
    let mut lp = LinearProgram::new(objective);
    for i in 0..n {
        lp.set_bounds(i, 0.0, unbounded_cap);
        lp.free(n + i);
    }
    for (i, p) in problems.iter().enumerate() {
        for j in 0..p.joint_count() {
            let mut coeffs = vec![0.0; 2 * n];
            coeffs[i] = p.jt_hd[j];
            coeffs[n + i] = p.jt_hdelta[j];
            let t = p.tau_max[j];
            let c = p.tau_prime[j];
            lp.add_row(coeffs, -t - c, t - c);
        }
    }
    let mut sum_alpha = vec![0.0; 2 * n];
    sum_alpha[n..].fill(1.0);
    lp.add_eq(sum_alpha, 1.0);

    match simplex_solve(&lp) {
        Ok(sol) => {
            let k: Vec<f64> = sol.x[..n].iter().map(|v| v.max(0.0)).collect();
            let status = k
                .iter()
                .map(|&v| {
                    if v >= unbounded_cap * (1.0 - 1e-12) {
                        CapabilityStatus::Unbounded
                    } else {
                        CapabilityStatus::Bounded
                    }
                })
                .collect();
            GroupCapability {
                total: k.iter().sum(),
                k,
                alpha: sol.x[n..].to_vec(),
                status,
            }
        }
        Err(_) => GroupCapability {
            k: vec![0.0; n],
            total: 0.0,
            alpha: beta.to_vec(),
            status: vec![CapabilityStatus::Infeasible; n],
        },
    }
}

/// Feasible EE wrench set of one arm under its torque limits.
#[derive(Debug, Clone, PartialEq)]
pub struct WrenchPolytope {
    pub jacobian: Jacobian,
    pub tau_prime: DVector<f64>,
    pub tau_max: DVector<f64>,
}

impl WrenchPolytope {
    /// True iff `-tau_max - tau' <= k J^T h <= tau_max - tau'` row-wise.
    pub fn contains(&self, h: &Vector6<f64>, k: f64) -> bool {
        let load = self.jacobian.transpose() * h * k;
        (0..load.len()).all(|j| {
            let t = self.tau_max[j];
            let c = self.tau_prime[j];
            -t - c <= load[j] && load[j] <= t - c
        })
    }

    pub fn problem(&self, h_d: &Wrench, h_delta: &Wrench) -> CapabilityProblem {
        CapabilityProblem::new(
            &self.jacobian,
            h_d,
            h_delta,
            self.tau_prime.clone(),
            self.tau_max.clone(),
        )
    }
}

pub fn feasible_wrench_check(polytope: &WrenchPolytope, h: &Vector6<f64>, k: f64) -> bool {
    polytope.contains(h, k)
}
