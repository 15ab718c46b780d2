//! Planar serial chains embedded in 3-D.
//!
//! Every joint rotates about the world -Y axis, so a positive joint angle
//! turns the chain from +X toward +Z. A link at cumulative angle `phi` points
//! along `[cos phi, 0, sin phi]`.

use nalgebra::Dyn;
use nalgebra::{DVector, Matrix3, Matrix3xX, OMatrix, Vector3, Vector6, U6};

use crate::model::{stack, ManipulatorModel, ObjectState};

pub type Jacobian = OMatrix<f64, U6, Dyn>;

/// Rotation axis shared by all joints, world frame.
pub const JOINT_AXIS: Vector3<f64> = Vector3::new(0.0, -1.0, 0.0);

/// Rows of a spatial twist that a planar chain can produce: x-velocity,
/// z-velocity and rotation rate about Y.
pub const PLANAR_ROWS: [usize; 3] = [0, 2, 4];

const FD_STEP: f64 = 1e-7;
const SINGULAR_THRESHOLD: f64 = 1e-6;
const DAMPING: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    pub qddot: DVector<f64>,
}

impl JointState {
    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            qdot: DVector::zeros(n),
            qddot: DVector::zeros(n),
        }
    }

    pub fn from_slices(q: &[f64], qdot: &[f64], qddot: &[f64]) -> Self {
        Self {
            q: DVector::from_column_slice(q),
            qdot: DVector::from_column_slice(qdot),
            qddot: DVector::from_column_slice(qddot),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: Matrix3<f64>,
}

/// Rotation taking +X to `[cos pitch, 0, sin pitch]` (about -Y).
pub fn planar_rotation(pitch: f64) -> Matrix3<f64> {
    let (s, c) = pitch.sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// Planar angle of a rotation produced by [`planar_rotation`].
pub fn pitch_of(r: &Matrix3<f64>) -> f64 {
    r[(2, 0)].atan2(r[(0, 0)])
}

pub fn link_direction(phi: f64) -> Vector3<f64> {
    Vector3::new(phi.cos(), 0.0, phi.sin())
}

/// Positions of every joint followed by the end-effector point.
pub fn joint_positions(model: &ManipulatorModel, q: &DVector<f64>) -> Vec<Vector3<f64>> {
    let mut points = Vec::with_capacity(q.len() + 1);
    let mut p = model.base();
    let mut phi = 0.0;
    points.push(p);
    for (qj, l) in q.iter().zip(&model.link_lengths) {
        phi += qj;
        p += link_direction(phi) * *l;
        points.push(p);
    }
    points
}

pub fn forward_kinematics(model: &ManipulatorModel, q: &DVector<f64>) -> Pose {
    let points = joint_positions(model, q);
    Pose {
        position: *points.last().unwrap(),
        orientation: planar_rotation(q.sum()),
    }
}

/// Geometric Jacobian in the world frame, referenced at the EE point.
/// Rows: linear velocity (x, y, z) then angular velocity (x, y, z).
pub fn jacobian(model: &ManipulatorModel, q: &DVector<f64>) -> Jacobian {
    let points = joint_positions(model, q);
    let ee = points[q.len()];
    let mut j = Jacobian::zeros(q.len());
    for (col, p) in points.iter().take(q.len()).enumerate() {
        let lin = JOINT_AXIS.cross(&(ee - p));
        j.fixed_view_mut::<3, 1>(0, col).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, col).copy_from(&JOINT_AXIS);
    }
    j
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

/// Closed-form inverse kinematics of a planar three-joint arm.
///
/// The target pitch fixes the wrist point; the remaining two-link problem
/// has an elbow-up and an elbow-down branch. Returns no solution when the
/// target is out of reach or out of the motion plane, and one solution at
/// full extension or full fold.
pub fn ik_planar3r(model: &ManipulatorModel, target: &Pose) -> Vec<DVector<f64>> {
    if model.joint_count != 3 || model.link_lengths.len() != 3 {
        return Vec::new();
    }
    let base = model.base();
    let r = &target.orientation;
    if (target.position.y - base.y).abs() > 1e-9 || (r[(1, 1)] - 1.0).abs() > 1e-9 {
        return Vec::new();
    }
    let (l1, l2, l3) = (
        model.link_lengths[0],
        model.link_lengths[1],
        model.link_lengths[2],
    );
    let pitch = pitch_of(r);
    let wrist = target.position - link_direction(pitch) * l3 - base;
    let (u, v) = (wrist.x, wrist.z);
    let c2 = (u * u + v * v - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !(-1.0 - BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&c2) {
        return Vec::new();
    }
    let elbows: Vec<f64> = if c2 >= 1.0 - BOUNDARY_TOL {
        vec![0.0]
    } else if c2 <= -1.0 + BOUNDARY_TOL {
        vec![std::f64::consts::PI]
    } else {
        let a = c2.acos();
        vec![a, -a]
    };
    elbows
        .into_iter()
        .map(|q2| {
            let q1 = v.atan2(u) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
            let q3 = pitch - q1 - q2;
            DVector::from_vec(vec![wrap_angle(q1), wrap_angle(q2), wrap_angle(q3)])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialIk {
    pub qdot: DVector<f64>,
    pub qddot: DVector<f64>,
    /// Damped least squares was used because the planar Jacobian was
    /// near-singular.
    pub damped: bool,
}

fn planar_rows(j: &Jacobian) -> Matrix3xX<f64> {
    Matrix3xX::from_fn(j.ncols(), |r, c| j[(PLANAR_ROWS[r], c)])
}

fn planar_part(v: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(v[PLANAR_ROWS[0]], v[PLANAR_ROWS[1]], v[PLANAR_ROWS[2]])
}

/// Time derivative of the Jacobian along `qdot`, by central differences in
/// each joint coordinate.
pub fn jacobian_rate(model: &ManipulatorModel, q: &DVector<f64>, qdot: &DVector<f64>) -> Jacobian {
    let mut jdot = Jacobian::zeros(q.len());
    for k in 0..q.len() {
        if qdot[k] == 0.0 {
            continue;
        }
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += FD_STEP;
        qm[k] -= FD_STEP;
        let dj = (jacobian(model, &qp) - jacobian(model, &qm)) / (2.0 * FD_STEP);
        jdot += dj * qdot[k];
    }
    jdot
}

/// Joint rates and accelerations producing the given EE twist and twist
/// derivative. Only the planar rows of the twist are used.
pub fn differential_ik(
    model: &ManipulatorModel,
    q: &DVector<f64>,
    ee_twist: &Vector6<f64>,
    ee_accel: &Vector6<f64>,
) -> DifferentialIk {
    let jr = planar_rows(&jacobian(model, q));
    let svd = jr.clone().svd(true, true);
    let damped = svd.singular_values.min() < SINGULAR_THRESHOLD;

    let solve = |rhs: Vector3<f64>| -> DVector<f64> {
        if damped {
            let jjt = &jr * jr.transpose() + Matrix3::identity() * (DAMPING * DAMPING);
            let y = jjt.lu().solve(&rhs).unwrap_or_else(Vector3::zeros);
            jr.transpose() * y
        } else {
            svd.solve(&rhs, 0.0).expect("SVD computed with U and V")
        }
    };

    let qdot = solve(planar_part(ee_twist));
    let bias = planar_rows(&jacobian_rate(model, q, &qdot)) * &qdot;
    let qddot = solve(planar_part(ee_accel) - bias);
    DifferentialIk {
        qdot,
        qddot,
        damped,
    }
}

/// EE pose of a rigid grasp at body-frame offset `grasp_point`.
pub fn ee_pose_from_object(object: &ObjectState, grasp_point: &Vector3<f64>) -> Pose {
    Pose {
        position: object.position + object.orientation * grasp_point,
        orientation: object.orientation,
    }
}

/// EE twist `G_i^T v_o` of a rigid grasp at body-frame offset `grasp_point`.
pub fn ee_twist_from_object(object: &ObjectState, grasp_point: &Vector3<f64>) -> Vector6<f64> {
    let r = object.orientation * grasp_point;
    let w = object.angular_velocity;
    stack(&(object.linear_velocity + w.cross(&r)), &w)
}

/// Time derivative of [`ee_twist_from_object`].
pub fn ee_accel_from_object(object: &ObjectState, grasp_point: &Vector3<f64>) -> Vector6<f64> {
    let r = object.orientation * grasp_point;
    let w = object.angular_velocity;
    let dw = object.angular_accel;
    let lin = object.linear_accel + dw.cross(&r) + w.cross(&w.cross(&r));
    stack(&lin, &dw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn arm(lengths: &[f64]) -> ManipulatorModel {
        let n = lengths.len();
        ManipulatorModel {
            id: 0,
            base_position: [0.0; 3],
            joint_count: n,
            link_lengths: lengths.to_vec(),
            link_masses: vec![0.1; n],
            link_com_offsets: lengths.iter().map(|l| l / 2.0).collect(),
            link_inertias: vec![1e-4; n],
            torque_limits: vec![1.0; n],
            velocity_limits: vec![5.0; n],
            grasp_pitch: 0.0,
            approximate: false,
        }
    }

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    // homogeneous transform about the -Y axis followed by translation along x
    fn transform_chain(model: &ManipulatorModel, q: &[f64]) -> Matrix4<f64> {
        let b = model.base_position;
        let mut t = Matrix4::new(
            1.0, 0.0, 0.0, b[0], 0.0, 1.0, 0.0, b[1], 0.0, 0.0, 1.0, b[2], 0.0, 0.0, 0.0, 1.0,
        );
        for (qj, l) in q.iter().zip(&model.link_lengths) {
            let (s, c) = qj.sin_cos();
            let rot = Matrix4::new(
                c, 0.0, -s, 0.0, 0.0, 1.0, 0.0, 0.0, s, 0.0, c, 0.0, 0.0, 0.0, 0.0, 1.0,
            );
            let tr = Matrix4::new(
                1.0, 0.0, 0.0, *l, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            );
            t = t * rot * tr;
        }
        t
    }

    #[test]
    fn fk_zero_and_quarter_turn() {
        let m = arm(&[0.1, 0.1, 0.1]);
        let p = forward_kinematics(&m, &dv(&[0.0, 0.0, 0.0])).position;
        assert!((p - Vector3::new(0.3, 0.0, 0.0)).norm() < 1e-15);
        let p = forward_kinematics(&m, &dv(&[FRAC_PI_2, 0.0, 0.0])).position;
        assert!((p - Vector3::new(0.0, 0.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn fk_matches_transform_chain() {
        let mut m = arm(&[0.13, 0.124, 0.126]);
        m.base_position = [0.3, -0.2, 0.1];
        let mut seed = 1u64;
        for _ in 0..50 {
            let q: Vec<f64> = (0..3).map(|_| lcg(&mut seed) * 2.0 * PI - PI).collect();
            let pose = forward_kinematics(&m, &dv(&q));
            let t = transform_chain(&m, &q);
            let p = Vector3::new(t[(0, 3)], t[(1, 3)], t[(2, 3)]);
            assert!((pose.position - p).norm() < 1e-12);
            let r = t.fixed_view::<3, 3>(0, 0).into_owned();
            assert!((pose.orientation - r).abs().max() < 1e-12);
            assert_eq!(pose.position.y, -0.2);
        }
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn two_link_jacobian_closed_form() {
        // planar 2R textbook: [-l1 s1 - l2 s12, -l2 s12; l1 c1 + l2 c12, l2 c12]
        let m = arm(&[0.1, 0.1]);
        for q in [[0.0f64, 0.0], [0.3, -1.1], [2.0, 0.7]] {
            let (l1, l2) = (0.1, 0.1);
            let (s1, c1) = q[0].sin_cos();
            let (s12, c12) = (q[0] + q[1]).sin_cos();
            let expected = [
                [-l1 * s1 - l2 * s12, -l2 * s12],
                [l1 * c1 + l2 * c12, l2 * c12],
            ];
            let j = jacobian(&m, &dv(&q));
            for c in 0..2 {
                assert!((j[(0, c)] - expected[0][c]).abs() < 1e-15);
                assert!((j[(2, c)] - expected[1][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jacobian_planar_structure() {
        let m = arm(&[0.13, 0.124, 0.126]);
        let j = jacobian(&m, &dv(&[0.4, -0.9, 1.3]));
        for c in 0..3 {
            assert_eq!(j[(1, c)], 0.0);
            assert_eq!(j[(3, c)], 0.0);
            assert_eq!(j[(5, c)], 0.0);
            assert_eq!(j[(4, c)], -1.0);
        }
    }

    #[test]
    fn ik_round_trip_and_boundaries() {
        let m = arm(&[0.13, 0.124, 0.126]);
        let q = dv(&[0.4, -0.9, 1.3]);
        let sols = ik_planar3r(&m, &forward_kinematics(&m, &q));
        assert_eq!(sols.len(), 2);
        assert!(sols.iter().any(|s| (s - &q).norm() < 1e-9));

        let full = forward_kinematics(&m, &dv(&[0.7, 0.0, 0.0]));
        assert_eq!(ik_planar3r(&m, &full).len(), 1);

        let far = Pose {
            position: Vector3::new(0.5, 0.0, 0.0),
            orientation: Matrix3::identity(),
        };
        assert!(ik_planar3r(&m, &far).is_empty());

        let off_plane = Pose {
            position: Vector3::new(0.2, 0.1, 0.0),
            orientation: Matrix3::identity(),
        };
        assert!(ik_planar3r(&m, &off_plane).is_empty());
    }

    #[test]
    fn differential_ik_null_motion() {
        let m = arm(&[0.13, 0.124, 0.126]);
        let r = differential_ik(
            &m,
            &dv(&[0.4, -0.9, 1.3]),
            &Vector6::zeros(),
            &Vector6::zeros(),
        );
        assert_eq!(r.qdot, DVector::zeros(3));
        assert_eq!(r.qddot, DVector::zeros(3));
        assert!(!r.damped);
    }

    #[test]
    fn differential_ik_flags_singularity() {
        let m = arm(&[0.13, 0.124, 0.126]);
        let mut v = Vector6::zeros();
        v[0] = 0.1;
        let r = differential_ik(&m, &dv(&[0.0, 0.0, 0.0]), &v, &Vector6::zeros());
        assert!(r.damped);
        assert!(r.qdot.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn object_coupling() {
        let mut s = ObjectState::at_rest(Vector3::new(0.35, 0.0, 0.35));
        let r1 = Vector3::new(0.1, 0.0, 0.0);
        let p = ee_pose_from_object(&s, &r1);
        assert!((p.position - Vector3::new(0.45, 0.0, 0.35)).norm() < 1e-15);
        assert_eq!(
            ee_pose_from_object(&s, &Vector3::zeros()).position,
            s.position
        );

        s.orientation = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        let p = ee_pose_from_object(&s, &r1);
        assert!((p.position - Vector3::new(0.25, 0.0, 0.35)).norm() < 1e-15);

        let mut s = ObjectState::at_rest(Vector3::zeros());
        assert_eq!(ee_twist_from_object(&s, &r1), Vector6::zeros());
        s.angular_velocity = Vector3::new(0.0, 1.0, 0.0);
        let v = ee_twist_from_object(&s, &r1);
        assert!((v.fixed_rows::<3>(0) - Vector3::new(0.0, 0.0, -0.1)).norm() < 1e-15);
        assert_eq!(v.fixed_rows::<3>(3).into_owned(), s.angular_velocity);

        s.angular_velocity = Vector3::zeros();
        s.linear_velocity = Vector3::new(0.2, 0.0, -0.3);
        let v = ee_twist_from_object(&s, &r1);
        assert_eq!(v.fixed_rows::<3>(0).into_owned(), s.linear_velocity);
    }

    #[test]
    fn planar_rotation_pitch_round_trip() {
        for a in [-3.0, -1.0, 0.0, 0.5, 3.1] {
            assert!((pitch_of(&planar_rotation(a)) - a).abs() < 1e-15);
        }
        assert!((planar_rotation(0.3) * Vector3::x() - link_direction(0.3)).norm() < 1e-15);
    }
}
