//! Grasp matrices, wrench assembly at the object CoM, and the counterbalance
//! moment produced by sharing the object force at off-CoM grasp points.

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3};

use crate::error::GraspError;
use crate::model::{ObjectState, RigidObjectModel, Wrench};

pub fn skew(r: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -r.z, r.y, r.z, 0.0, -r.x, -r.y, r.x, 0.0)
}

/// `[[I, 0], [S(r), I]]`: maps a wrench at the grasp point to the
/// equivalent wrench at the CoM.
pub fn grasp_matrix(r: &Vector3<f64>) -> Matrix6<f64> {
    let mut g = Matrix6::identity();
    g.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(r));
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspMap {
    /// World-frame grasp vectors from the CoM.
    pub offsets: Vec<Vector3<f64>>,
    pub blocks: Vec<Matrix6<f64>>,
}

impl GraspMap {
    pub fn new(offsets: Vec<Vector3<f64>>) -> Self {
        let blocks = offsets.iter().map(grasp_matrix).collect();
        Self { offsets, blocks }
    }

    pub fn from_object(object: &RigidObjectModel, state: &ObjectState) -> Self {
        Self::new(
            (0..object.grasp_points.len())
                .map(|i| state.orientation * object.grasp_point(i))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Combined `6 x 6N` grasp matrix.
    pub fn combined(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(6, 6 * self.len());
        for (i, b) in self.blocks.iter().enumerate() {
            g.view_mut((0, 6 * i), (6, 6)).copy_from(b);
        }
        g
    }
}

/// Resultant wrench at the CoM, `sum_i G_i h_i`.
pub fn object_wrench_from_ee(map: &GraspMap, ee_wrenches: &[Wrench]) -> Result<Wrench, GraspError> {
    if ee_wrenches.len() != map.len() {
        return Err(GraspError::DimensionMismatch {
            expected: map.len(),
            actual: ee_wrenches.len(),
        });
    }
    let total = map
        .blocks
        .iter()
        .zip(ee_wrenches)
        .map(|(g, h)| g * h.to_vector())
        .sum();
    Ok(Wrench::from_vector(&total))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationWeights {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl AllocationWeights {
    pub fn uniform(n: usize) -> Self {
        let w = vec![1.0 / n as f64; n];
        Self {
            beta: w.clone(),
            alpha: w,
        }
    }

    /// Counterbalance shares equal to the wrench shares.
    pub fn matched(beta: Vec<f64>) -> Self {
        Self {
            alpha: beta.clone(),
            beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counterbalance {
    /// Weighted grasp offset `sum_i beta_i r_i`.
    pub lever: Vector3<f64>,
    pub t_delta: Vector3<f64>,
    /// Cancelling wrench: zero force, torque `-t_delta`.
    pub h_delta: Wrench,
}

/// Net moment about the CoM when each arm applies `beta_i f_o` at its grasp
/// point, and the pure-torque wrench that cancels it.
pub fn counterbalance_moment(
    beta: &[f64],
    map: &GraspMap,
    object_force: &Vector3<f64>,
) -> Counterbalance {
    let lever: Vector3<f64> = beta.iter().zip(&map.offsets).map(|(b, r)| r * *b).sum();
    let t_delta = lever.cross(object_force);
    Counterbalance {
        lever,
        t_delta,
        h_delta: Wrench::pure_torque(-t_delta),
    }
}

/// Shares proportional to capability.
pub fn allocate_proportional(k: &[f64]) -> Result<Vec<f64>, GraspError> {
    let total: f64 = k.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(GraspError::ZeroCapability);
    }
    Ok(k.iter().map(|ki| ki / total).collect())
}

/// Per-arm EE wrenches `beta_i h_d + alpha_i h_delta`.
pub fn ee_wrenches(weights: &AllocationWeights, h_d: &Wrench, h_delta: &Wrench) -> Vec<Wrench> {
    weights
        .beta
        .iter()
        .zip(&weights.alpha)
        .map(|(b, a)| h_d.scaled(*b) + h_delta.scaled(*a))
        .collect()
}

/// Norm of `sum_i G_i (beta_i h_d + alpha_i h_delta) - h_d`.
pub fn balance_residual(
    map: &GraspMap,
    weights: &AllocationWeights,
    h_d: &Wrench,
    h_delta: &Wrench,
) -> f64 {
    let applied = object_wrench_from_ee(map, &ee_wrenches(weights, h_d, h_delta))
        .expect("weights sized to the grasp map");
    (applied - *h_d).to_vector().norm()
}
