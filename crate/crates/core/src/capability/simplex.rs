//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `maximize c^T x` subject to two-sided row bounds
//! `lower <= a^T x <= upper` and per-variable bounds, any of which may be
//! infinite. They are rewritten into `A y = b, y >= 0, b >= 0` and solved
//! on a full tableau. Pivoting follows Bland's rule, so runs are
//! deterministic and cannot cycle.

use crate::error::LpError;

const EPS: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Maximized.
    pub objective: Vec<f64>,
    /// `(lower, upper)` per variable.
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    /// All variables default to `x >= 0`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            bounds: vec![(0.0, f64::INFINITY); n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, lower: f64, upper: f64) -> &mut Self {
        self.rows.push(Constraint {
            coeffs,
            lower,
            upper,
        });
        self
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, upper: f64) -> &mut Self {
        self.add_row(coeffs, f64::NEG_INFINITY, upper)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, value: f64) -> &mut Self {
        self.add_row(coeffs, value, value)
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (xj, (lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - xj).max(xj - hi);
        }
        for row in &self.rows {
            let ax: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            worst = worst.max(row.lower - ax).max(ax - row.upper);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// `x_j = offset + sum(coef * y_col)`.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

/// Sparse coefficients, sense, right-hand side.
type StdRow = (Vec<(usize, f64)>, Sense, f64);

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Le,
    Ge,
    Eq,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    iterations: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.rows[i][c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Maximizes `cost^T y` over columns `< allowed` (basic columns beyond
    /// that are tolerated but never enter).
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpError> {
        let m = self.rows.len();
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(LpError::Malformed("iteration limit reached".into()));
            }
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - (0..m)
                        .map(|r| cost[self.basis[r]] * self.rows[r][j])
                        .sum::<f64>();
                if reduced > EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.rows[r][c];
                if a <= EPS {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - EPS
                            || (ratio <= bratio + EPS && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(LpError::Unbounded),
            }
        }
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    if lp.bounds.len() != n {
        return Err(LpError::Malformed(
            "bounds length differs from objective".into(),
        ));
    }
    if let Some(r) = lp.rows.iter().position(|r| r.coeffs.len() != n) {
        return Err(LpError::Malformed(format!("row {r} has wrong length")));
    }
    let all_finite_coeffs = lp
        .objective
        .iter()
        .chain(lp.rows.iter().flat_map(|r| r.coeffs.iter()))
        .all(|v| v.is_finite());
    if !all_finite_coeffs {
        return Err(LpError::Malformed("non-finite coefficient".into()));
    }

    // variable substitution
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut std_rows: Vec<StdRow> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(LpError::Malformed("invalid variable bound".into()));
        }
        if lo > hi {
            return Err(LpError::Infeasible);
        }
        let map = if lo.is_finite() {
            if hi.is_finite() {
                std_rows.push((vec![(ny, 1.0)], Sense::Le, hi - lo));
            }
            VarMap {
                offset: lo,
                terms: vec![(ny, 1.0)],
            }
        } else if hi.is_finite() {
            VarMap {
                offset: hi,
                terms: vec![(ny, -1.0)],
            }
        } else {
            ny += 1;
            VarMap {
                offset: 0.0,
                terms: vec![(ny - 1, 1.0), (ny, -1.0)],
            }
        };
        ny += 1;
        maps.push(map);
    }

    for row in &lp.rows {
        if row.lower.is_nan() || row.upper.is_nan() {
            return Err(LpError::Malformed("NaN row bound".into()));
        }
        if row.lower > row.upper {
            return Err(LpError::Infeasible);
        }
        let mut coeffs = vec![0.0; ny];
        let mut shift = 0.0;
        for (a, map) in row.coeffs.iter().zip(&maps) {
            shift += a * map.offset;
            for &(col, s) in &map.terms {
                coeffs[col] += a * s;
            }
        }
        let sparse: Vec<(usize, f64)> = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .collect();
        if row.lower == row.upper {
            std_rows.push((sparse, Sense::Eq, row.lower - shift));
            continue;
        }
        if row.upper.is_finite() {
            std_rows.push((sparse.clone(), Sense::Le, row.upper - shift));
        }
        if row.lower.is_finite() {
            std_rows.push((sparse, Sense::Ge, row.lower - shift));
        }
    }

    let m = std_rows.len();
    let nslack = std_rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let first_art = ny + nslack;
    let ncols = first_art + m;
    let mut tab = Tableau {
        rows: vec![vec![0.0; ncols]; m],
        rhs: vec![0.0; m],
        basis: vec![0; m],
        ncols,
        iterations: 0,
    };
    let mut slack = ny;
    for (r, (coeffs, sense, b)) in std_rows.iter().enumerate() {
        let row = &mut tab.rows[r];
        for &(c, v) in coeffs {
            row[c] = v;
        }
        let slack_col = match sense {
            Sense::Le => {
                row[slack] = 1.0;
                slack += 1;
                Some(slack - 1)
            }
            Sense::Ge => {
                row[slack] = -1.0;
                slack += 1;
                Some(slack - 1)
            }
            Sense::Eq => None,
        };
        let mut rhs = *b;
        if rhs < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            rhs = -rhs;
        }
        tab.rhs[r] = rhs;
        tab.basis[r] = match slack_col {
            Some(s) if row[s] > 0.0 => s,
            _ => {
                row[first_art + r] = 1.0;
                first_art + r
            }
        };
    }

    // phase 1: drive artificials to zero
    let mut phase1 = vec![0.0; ncols];
    for c in phase1.iter_mut().skip(first_art) {
        *c = -1.0;
    }
    tab.optimize(&phase1, ncols)?;
    let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let infeasibility: f64 = (0..m)
        .filter(|&r| tab.basis[r] >= first_art)
        .map(|r| tab.rhs[r])
        .sum();
    if infeasibility > 1e-9 * scale {
        return Err(LpError::Infeasible);
    }

    // remove artificials still basic at zero level; drop redundant rows
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= first_art {
            match (0..first_art).find(|&j| tab.rows[r][j].abs() > 1e-9) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = vec![0.0; tab.ncols];
    for (cj, map) in lp.objective.iter().zip(&maps) {
        for &(col, s) in &map.terms {
            cost[col] += cj * s;
        }
    }
    tab.optimize(&cost, first_art)?;

    let mut y = vec![0.0; ny];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < ny {
            y[b] = tab.rhs[r];
        }
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| map.offset + map.terms.iter().map(|&(c, s)| s * y[c]).sum::<f64>())
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations: tab.iterations,
    })
}
