//! Convex quadratic programs with a diagonal Hessian:
//!
//! ```text
//! minimize    sum_j q_j x_j^2 + c^T x
//! subject to  A x = b,  G x <= h,  lo <= x <= hi
//! ```
//!
//! solved by a primal-dual interior-point method. Infeasibility is decided by
//! an explicit phase-1 program.

mod ipm;
mod ldl;
mod sparse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sparse::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative quadratic cost {value} on variable {index}")]
    NonConvex { index: usize, value: f64 },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("phase-1 did not converge in {0} iterations")]
    Phase1Failed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadProgram {
    pub n: usize,
    pub q_diag: Vec<f64>,
    pub c_lin: Vec<f64>,
    pub a_eq: SparseMatrix,
    pub b_eq: Vec<f64>,
    pub g_ineq: SparseMatrix,
    pub h_ineq: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub names: Vec<String>,
}

impl QuadProgram {
    /// `n` free variables, zero objective, no constraints.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            q_diag: vec![0.0; n],
            c_lin: vec![0.0; n],
            a_eq: SparseMatrix::new(n),
            b_eq: Vec::new(),
            g_ineq: SparseMatrix::new(n),
            h_ineq: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            names: (0..n).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn add_eq(&mut self, entries: &[(usize, f64)], rhs: f64) -> usize {
        self.a_eq.push_row(entries);
        self.b_eq.push(rhs);
        self.b_eq.len() - 1
    }

    pub fn add_ineq(&mut self, entries: &[(usize, f64)], rhs: f64) -> usize {
        self.g_ineq.push_row(entries);
        self.h_ineq.push(rhs);
        self.h_ineq.len() - 1
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn m_eq(&self) -> usize {
        self.b_eq.len()
    }

    pub fn m_ineq(&self) -> usize {
        self.h_ineq.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| self.q_diag[j] * x[j] * x[j] + self.c_lin[j] * x[j])
            .sum()
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let dim = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(QpError::Dimension(format!("{what}: {got}, expected {want}")))
            }
        };
        dim("q_diag", self.q_diag.len(), self.n)?;
        dim("c_lin", self.c_lin.len(), self.n)?;
        dim("lower", self.lower.len(), self.n)?;
        dim("upper", self.upper.len(), self.n)?;
        dim("names", self.names.len(), self.n)?;
        dim("A columns", self.a_eq.ncols(), self.n)?;
        dim("G columns", self.g_ineq.ncols(), self.n)?;
        dim("b_eq", self.b_eq.len(), self.a_eq.nrows())?;
        dim("h_ineq", self.h_ineq.len(), self.g_ineq.nrows())?;
        for (index, &value) in self.q_diag.iter().enumerate() {
            if value < 0.0 {
                return Err(QpError::NonConvex { index, value });
            }
        }
        let all_finite = self.q_diag.iter().chain(&self.c_lin).chain(&self.b_eq).chain(&self.h_ineq);
        if all_finite.clone().any(|v| !v.is_finite()) {
            return Err(QpError::InvalidData("non-finite cost or right-hand side".into()));
        }
        for j in 0..self.n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(QpError::InvalidData(format!(
                    "bounds [{lo}, {hi}] on `{}`",
                    self.names[j]
                )));
            }
        }
        Ok(())
    }

    /// JSON form for cross-checking with external solvers.
    ///
    /// Keys: `n`, `q_diag`, `c_lin`, `a_eq` and `g_ineq` as lists of
    /// `[row, col, value]`, `b_eq`, `h_ineq`, `lower`, `upper` (with `null`
    /// for an infinite bound) and `names`. The objective is
    /// `sum q_diag[j] x[j]^2 + c_lin . x`, without a factor one half.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let triplets = |m: &SparseMatrix| -> Vec<(usize, usize, f64)> {
            (0..m.nrows())
                .flat_map(|i| m.row(i).map(move |(j, v)| (i, j, v)))
                .collect()
        };
        let finite = |v: &[f64]| -> Vec<Option<f64>> {
            v.iter().map(|x| x.is_finite().then_some(*x)).collect()
        };
        serde_json::json!({
            "n": self.n,
            "q_diag": self.q_diag,
            "c_lin": self.c_lin,
            "a_eq": triplets(&self.a_eq),
            "b_eq": self.b_eq,
            "g_ineq": triplets(&self.g_ineq),
            "h_ineq": self.h_ineq,
            "lower": finite(&self.lower),
            "upper": finite(&self.upper),
            "names": self.names,
        })
    }

    pub fn from_debug_json(value: &serde_json::Value) -> Result<Self, QpError> {
        #[derive(Deserialize)]
        struct Dump {
            n: usize,
            q_diag: Vec<f64>,
            c_lin: Vec<f64>,
            a_eq: Vec<(usize, usize, f64)>,
            b_eq: Vec<f64>,
            g_ineq: Vec<(usize, usize, f64)>,
            h_ineq: Vec<f64>,
            lower: Vec<Option<f64>>,
            upper: Vec<Option<f64>>,
            names: Vec<String>,
        }
        let d: Dump = serde_json::from_value(value.clone())
            .map_err(|e| QpError::InvalidData(e.to_string()))?;
        let rows = |trip: &[(usize, usize, f64)], m: usize| -> Result<SparseMatrix, QpError> {
            let mut per_row = vec![Vec::new(); m];
            for &(i, j, v) in trip {
                if i >= m || j >= d.n {
                    return Err(QpError::Dimension(format!("entry ({i}, {j})")));
                }
                per_row[i].push((j, v));
            }
            let mut out = SparseMatrix::new(d.n);
            per_row.iter().for_each(|r| out.push_row(r));
            Ok(out)
        };
        let p = Self {
            n: d.n,
            a_eq: rows(&d.a_eq, d.b_eq.len())?,
            g_ineq: rows(&d.g_ineq, d.h_ineq.len())?,
            q_diag: d.q_diag,
            c_lin: d.c_lin,
            b_eq: d.b_eq,
            h_ineq: d.h_ineq,
            lower: d.lower.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect(),
            upper: d.upper.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
            names: d.names,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Primal-dual pair for the Lagrangian
/// `f(x) + y^T (A x - b) + z^T (G x - h) + w^T x` with `z >= 0`, where the
/// bound multiplier `w` is nonnegative at an active upper bound and
/// nonpositive at an active lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub duals_eq: Vec<f64>,
    pub duals_ineq: Vec<f64>,
    pub duals_bound: Vec<f64>,
    pub objective: f64,
    pub status: Status,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Phase-1 threshold on total constraint violation.
    pub feas_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_primal: 1e-8,
            tol_dual: 1e-8,
            tol_gap: 1e-8,
            max_iter: 100,
            feas_tol: 1e-7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), QpError> {
        let positive = [self.tol_primal, self.tol_dual, self.tol_gap, self.feas_tol]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive || self.max_iter == 0 {
            return Err(QpError::InvalidData("solver tolerances and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Scaled residuals of the optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub r_stat: f64,
    pub r_feas: f64,
    pub r_comp: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.r_stat.max(self.r_feas).max(self.r_comp)
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Stationarity, feasibility and complementarity residuals in the
/// infinity norm, each scaled by one plus the size of the terms involved.
///
/// Dual sign violations (`z < 0`, or a bound multiplier pushing against an
/// infinite bound) count toward stationarity.
pub fn kkt_residuals(p: &QuadProgram, s: &Solution) -> Result<KktResiduals, QpError> {
    if s.x.len() != p.n
        || s.duals_bound.len() != p.n
        || s.duals_eq.len() != p.m_eq()
        || s.duals_ineq.len() != p.m_ineq()
    {
        return Err(QpError::Dimension("solution does not match program".into()));
    }
    let x = &s.x;
    let qx: Vec<f64> = (0..p.n).map(|j| 2.0 * p.q_diag[j] * x[j]).collect();
    let mut aty = vec![0.0; p.n];
    p.a_eq.mul_t_add(&s.duals_eq, &mut aty);
    let mut gtz = vec![0.0; p.n];
    p.g_ineq.mul_t_add(&s.duals_ineq, &mut gtz);
    let grad: Vec<f64> = (0..p.n)
        .map(|j| qx[j] + p.c_lin[j] + aty[j] + gtz[j] + s.duals_bound[j])
        .collect();
    let mut sign = norm_inf(
        &s.duals_ineq.iter().map(|z| z.min(0.0)).collect::<Vec<_>>(),
    );
    for j in 0..p.n {
        let w = s.duals_bound[j];
        if (w > 0.0 && p.upper[j].is_infinite()) || (w < 0.0 && p.lower[j].is_infinite()) {
            sign = sign.max(w.abs());
        }
    }
    let stat_scale = 1.0
        + [norm_inf(&qx), norm_inf(&p.c_lin), norm_inf(&aty), norm_inf(&gtz), norm_inf(&s.duals_bound)]
            .into_iter()
            .fold(0.0, f64::max);
    let r_stat = norm_inf(&grad).max(sign) / stat_scale;

    let ax = p.a_eq.mul(x);
    let eq_res: Vec<f64> = ax.iter().zip(&p.b_eq).map(|(a, b)| a - b).collect();
    let r_eq = norm_inf(&eq_res) / (1.0 + norm_inf(&ax).max(norm_inf(&p.b_eq)));
    let gx = p.g_ineq.mul(x);
    let viol: Vec<f64> = gx.iter().zip(&p.h_ineq).map(|(g, h)| (g - h).max(0.0)).collect();
    let r_in = norm_inf(&viol) / (1.0 + norm_inf(&gx).max(norm_inf(&p.h_ineq)));
    let bound_viol = (0..p.n)
        .map(|j| (p.lower[j] - x[j]).max(x[j] - p.upper[j]).max(0.0))
        .fold(0.0, f64::max);
    let r_bound = bound_viol / (1.0 + norm_inf(x));
    let r_feas = r_eq.max(r_in).max(r_bound);

    let mut comp: f64 = 0.0;
    for i in 0..p.m_ineq() {
        comp = comp.max((s.duals_ineq[i] * (p.h_ineq[i] - gx[i])).abs());
    }
    for j in 0..p.n {
        let w = s.duals_bound[j];
        if w > 0.0 && p.upper[j].is_finite() {
            comp = comp.max((w * (p.upper[j] - x[j])).abs());
        } else if w < 0.0 && p.lower[j].is_finite() {
            comp = comp.max((w * (x[j] - p.lower[j])).abs());
        }
    }
    let r_comp = comp / (1.0 + s.objective.abs());
    Ok(KktResiduals {
        r_stat,
        r_feas,
        r_comp,
    })
}

/// Lagrange dual function value at the solution's multipliers, evaluated
/// through the primal point (exact when stationarity holds).
pub fn dual_objective(p: &QuadProgram, s: &Solution) -> f64 {
    let quad: f64 = (0..p.n).map(|j| p.q_diag[j] * s.x[j] * s.x[j]).sum();
    let by: f64 = p.b_eq.iter().zip(&s.duals_eq).map(|(b, y)| b * y).sum();
    let hz: f64 = p.h_ineq.iter().zip(&s.duals_ineq).map(|(h, z)| h * z).sum();
    let mut bounds = 0.0;
    for j in 0..p.n {
        let w = s.duals_bound[j];
        if w < 0.0 {
            bounds += p.lower[j] * (-w);
        } else if w > 0.0 {
            bounds -= p.upper[j] * w;
        }
    }
    -quad - by - hz + bounds
}

/// Solve a program to optimality or classify it.
///
/// ```
/// use energyshed::qp::{solve_qp, QuadProgram, SolverConfig, Status};
/// // minimize x^2 subject to x >= 1
/// let mut p = QuadProgram::new(1);
/// p.q_diag[0] = 1.0;
/// p.set_bounds(0, 1.0, f64::INFINITY);
/// let s = solve_qp(&p, &SolverConfig::default()).unwrap();
/// assert_eq!(s.status, Status::Optimal);
/// assert!((s.x[0] - 1.0).abs() < 1e-7);
/// ```
pub fn solve_qp(p: &QuadProgram, cfg: &SolverConfig) -> Result<Solution, QpError> {
    p.validate()?;
    cfg.validate()?;
    ipm::solve(p, cfg)
}

/// Decide whether the constraints of `p` admit a point, ignoring its
/// objective.
pub fn check_feasibility(p: &QuadProgram, cfg: &SolverConfig) -> Result<Feasibility, QpError> {
    p.validate()?;
    cfg.validate()?;
    Ok(ipm::phase1(p, cfg)?.0)
}
