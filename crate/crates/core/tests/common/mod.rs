//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use coopwrench::capability::simplex::LinearProgram;
use coopwrench::capability::CapabilityProblem;
use coopwrench::kinematics::{forward_kinematics, Jacobian};
use coopwrench::ManipulatorModel;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::rngs::StdRng;
use rand::Rng;

pub fn arm(lengths: &[f64], masses: &[f64]) -> ManipulatorModel {
    let n = lengths.len();
    ManipulatorModel {
        id: 1,
        base_position: [0.0; 3],
        joint_count: n,
        link_lengths: lengths.to_vec(),
        link_masses: masses.to_vec(),
        link_com_offsets: lengths.iter().map(|l| 0.4 * l).collect(),
        link_inertias: lengths
            .iter()
            .zip(masses)
            .map(|(l, m)| m * l * l / 12.0)
            .collect(),
        torque_limits: vec![1.0; n],
        velocity_limits: vec![4.8; n],
        grasp_pitch: 0.0,
        approximate: false,
    }
}

pub fn random_arm(rng: &mut StdRng, n: usize) -> ManipulatorModel {
    let lengths: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.4)).collect();
    let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..2.0)).collect();
    let mut m = arm(&lengths, &masses);
    m.base_position = [
        rng.random_range(-0.5..0.5),
        0.0,
        rng.random_range(-0.5..0.5),
    ];
    m.link_com_offsets = lengths
        .iter()
        .map(|l| l * rng.random_range(0.1..0.9))
        .collect();
    m
}

pub fn random_q(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0))
}

/// Textbook planar 2R dynamics, angles measured from +X toward +Z with
/// gravity along -Z. Returns `(M, c, g)` with `tau = M qdd + c + g`.
pub fn planar_2r(
    m: &ManipulatorModel,
    q: &[f64],
    qd: &[f64],
    gravity: f64,
) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let (l1, lc1, lc2) = (
        m.link_lengths[0],
        m.link_com_offsets[0],
        m.link_com_offsets[1],
    );
    let (m1, m2) = (m.link_masses[0], m.link_masses[1]);
    let (i1, i2) = (m.link_inertias[0], m.link_inertias[1]);
    let (c2, s2) = (q[1].cos(), q[1].sin());
    let m11 = i1 + i2 + m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * c2);
    let m12 = i2 + m2 * (lc2 * lc2 + l1 * lc2 * c2);
    let m22 = i2 + m2 * lc2 * lc2;
    let h = m2 * l1 * lc2 * s2;
    let coriolis = DVector::from_vec(vec![
        -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]),
        h * qd[0] * qd[0],
    ]);
    let c1 = q[0].cos();
    let c12 = (q[0] + q[1]).cos();
    let grav = DVector::from_vec(vec![
        (m1 * lc1 + m2 * l1) * gravity * c1 + m2 * lc2 * gravity * c12,
        m2 * lc2 * gravity * c12,
    ]);
    (
        DMatrix::from_row_slice(2, 2, &[m11, m12, m12, m22]),
        coriolis,
        grav,
    )
}

pub fn vee(s: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        s[(2, 1)] - s[(1, 2)],
        s[(0, 2)] - s[(2, 0)],
        s[(1, 0)] - s[(0, 1)],
    ) * 0.5
}

/// Central-difference Jacobian; the angular part is read off `dR R^T`.
pub fn fd_jacobian(model: &ManipulatorModel, q: &DVector<f64>, h: f64) -> Jacobian {
    let mut j = Jacobian::zeros(q.len());
    for k in 0..q.len() {
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += h;
        qm[k] -= h;
        let (pp, pm) = (
            forward_kinematics(model, &qp),
            forward_kinematics(model, &qm),
        );
        let lin = (pp.position - pm.position) / (2.0 * h);
        let center = forward_kinematics(model, q).orientation;
        let ang = vee(&((pp.orientation - pm.orientation) / (2.0 * h) * center.transpose()));
        for r in 0..3 {
            j[(r, k)] = lin[r];
            j[(r + 3, k)] = ang[r];
        }
    }
    j
}

pub fn random_problem(rng: &mut StdRng, n: usize, feasible_at_zero: bool) -> CapabilityProblem {
    let tau_max = DVector::from_fn(n, |_, _| rng.random_range(0.2..3.0));
    let tau_prime = DVector::from_fn(n, |j, _| {
        let bound = if feasible_at_zero {
            tau_max[j]
        } else {
            2.0 * tau_max[j]
        };
        rng.random_range(-bound..bound)
    });
    let jt_hd = DVector::from_fn(n, |_, _| {
        if rng.random_bool(0.05) {
            0.0
        } else {
            rng.random_range(-5.0..5.0)
        }
    });
    let jt_hdelta = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    CapabilityProblem {
        jt_hd,
        jt_hdelta,
        tau_prime,
        tau_max,
    }
}

fn offsets(p: &CapabilityProblem, alpha: Option<f64>) -> Vec<f64> {
    (0..p.joint_count())
        .map(|j| p.tau_prime[j] + alpha.map_or(0.0, |a| a * p.jt_hdelta[j]))
        .collect()
}

pub fn scalar_feasible(p: &CapabilityProblem, alpha: Option<f64>, k: f64) -> bool {
    let c = offsets(p, alpha);
    (0..p.joint_count()).all(|j| (p.jt_hd[j] * k + c[j]).abs() <= p.tau_max[j])
}

/// Largest feasible `k` by bisection, for problems feasible at `k = 0`.
/// `None` when no finite bound is found below `cap`.
pub fn bisect_capability(p: &CapabilityProblem, alpha: Option<f64>, cap: f64) -> Option<f64> {
    assert!(scalar_feasible(p, alpha, 0.0));
    let mut lo = 0.0;
    let mut hi = 1.0;
    while scalar_feasible(p, alpha, hi) {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if scalar_feasible(p, alpha, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// `a . x <= b` form of every row and bound of the program.
pub fn halfspaces(lp: &LinearProgram) -> Vec<(Vec<f64>, f64)> {
    let n = lp.num_vars();
    let mut out = Vec::new();
    for (i, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        if hi.is_finite() {
            out.push((e.clone(), hi));
        }
        if lo.is_finite() {
            out.push((e.iter().map(|v| -v).collect(), -lo));
        }
    }
    for row in &lp.rows {
        if row.upper.is_finite() {
            out.push((row.coeffs.clone(), row.upper));
        }
        if row.lower.is_finite() {
            out.push((row.coeffs.iter().map(|v| -v).collect(), -row.lower));
        }
    }
    out
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Best objective over all basic feasible points of a bounded program;
/// `None` if no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let hs = halfspaces(lp);
    let m = hs.len();
    if m < n {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best: Option<f64> = None;
    loop {
        let a = idx.iter().map(|&i| hs[i].0.clone()).collect();
        let b = idx.iter().map(|&i| hs[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            let ok = hs.iter().all(|(a, b)| {
                a.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= b + 1e-9 * (1.0 + b.abs())
            });
            if ok {
                let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(obj, |v: f64| v.max(obj)));
            }
        }
        if !next_combination(&mut idx, m) {
            return best;
        }
    }
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Random bounded program with at most 10 variables and 20 rows, sized so
/// that vertex enumeration stays cheap.
pub fn random_lp(rng: &mut StdRng) -> LinearProgram {
    let n = rng.random_range(1..=10usize);
    let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lp = LinearProgram::new(objective);
    let mut count = 0;
    for i in 0..n {
        let lo = [0.0, -1.0, -0.5][rng.random_range(0..3)];
        if rng.random_bool(0.3) {
            lp.set_bounds(i, lo, rng.random_range(0.5..3.0));
            count += 2;
        } else {
            lp.set_bounds(i, lo, f64::INFINITY);
            count += 1;
        }
    }
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    lp.add_le(weights, rng.random_range(1.0..5.0));
    count += 1;
    let mut rows = 1;
    while rows < 20 {
        let kind = rng.random_range(0..10);
        let extra = if kind >= 8 { 2 } else { 1 };
        if binomial(count + extra, n) > 4000.0 {
            break;
        }
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        match kind {
            0..=5 => lp.add_le(coeffs, rng.random_range(0.2..2.0)),
            6..=7 => lp.add_row(coeffs, rng.random_range(-1.5..0.3), f64::INFINITY),
            8 => lp.add_eq(coeffs, rng.random_range(-0.3..0.3)),
            _ => {
                let lo = rng.random_range(-1.0..0.0);
                lp.add_row(coeffs, lo, lo + rng.random_range(0.1..1.0))
            }
        };
        count += extra;
        rows += 1;
    }
    lp
}
