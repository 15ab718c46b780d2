//! Inverse dynamics of the planar arms and the desired object wrench.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::kinematics::{link_direction, JointState, JOINT_AXIS};
use crate::model::{ManipulatorModel, ObjectState, RigidObjectModel, Wrench};

/// Joint torques consumed by the arm's own motion (no external load).
///
/// Recursive Newton-Euler over the chain with gravity along -Z, introduced
/// as an upward base acceleration. Links carry their rotational inertia
/// about the joint axis only, the only component excited by the planar
/// joints.
pub fn inverse_dynamics(
    model: &ManipulatorModel,
    state: &JointState,
    gravity: f64,
) -> DVector<f64> {
    let n = state.q.len();
    let z = JOINT_AXIS;

    let mut omega = Vector3::zeros();
    let mut alpha = Vector3::zeros();
    let mut accel = Vector3::new(0.0, 0.0, gravity);
    let mut phi = 0.0;

    let mut link_omega = Vec::with_capacity(n);
    let mut link_alpha = Vec::with_capacity(n);
    let mut com_accel = Vec::with_capacity(n);
    let mut link_vec = Vec::with_capacity(n);
    let mut com_vec = Vec::with_capacity(n);

    for j in 0..n {
        phi += state.q[j];
        let u = link_direction(phi);
        let w_prev = omega;
        omega = w_prev + z * state.qdot[j];
        alpha = alpha + z * state.qddot[j] + w_prev.cross(&(z * state.qdot[j]));

        let r = u * model.link_lengths[j];
        let rc = u * model.link_com_offsets[j];
        let ac = accel + alpha.cross(&rc) + omega.cross(&omega.cross(&rc));
        accel = accel + alpha.cross(&r) + omega.cross(&omega.cross(&r));

        link_omega.push(omega);
        link_alpha.push(alpha);
        com_accel.push(ac);
        link_vec.push(r);
        com_vec.push(rc);
    }

    let mut tau = DVector::zeros(n);
    let mut f_next = Vector3::zeros();
    let mut n_next = Vector3::zeros();
    for j in (0..n).rev() {
        let m = model.link_masses[j];
        let inertia = model.link_inertias[j];
        let f = f_next + com_accel[j] * m;
        // axial inertia only: omega is parallel to the axis, gyroscopic term vanishes
        let moment = n_next
            + link_vec[j].cross(&f_next)
            + com_vec[j].cross(&(com_accel[j] * m))
            + link_alpha[j] * inertia
            + link_omega[j].cross(&(link_omega[j] * inertia));
        tau[j] = z.dot(&moment);
        f_next = f;
        n_next = moment;
    }
    tau
}

/// Joint-space inertia matrix, one RNE call per unit acceleration column.
pub fn mass_matrix(model: &ManipulatorModel, q: &DVector<f64>) -> DMatrix<f64> {
    let n = q.len();
    let mut m = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut state = JointState::at_rest(q.clone());
        state.qddot[c] = 1.0;
        m.set_column(c, &inverse_dynamics(model, &state, 0.0));
    }
    m
}

pub fn gravity_vector(model: &ManipulatorModel, q: &DVector<f64>, gravity: f64) -> DVector<f64> {
    inverse_dynamics(model, &JointState::at_rest(q.clone()), gravity)
}

/// Wrench the end-effectors must apply at the object CoM to realize the
/// object's motion. Hovering needs an upward force of `m * g`.
pub fn object_desired_wrench(
    object: &RigidObjectModel,
    state: &ObjectState,
    gravity: f64,
) -> Wrench {
    let m = object.mass;
    let force = state.linear_accel * m + Vector3::new(0.0, 0.0, m * gravity);
    let r = state.orientation;
    let inertia_world = r * object.inertia_matrix() * r.transpose();
    let w = state.angular_velocity;
    let torque = inertia_world * state.angular_accel + w.cross(&(inertia_world * w));
    Wrench::new(force, torque)
}
