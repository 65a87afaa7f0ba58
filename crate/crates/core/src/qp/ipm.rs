//! Mehrotra predictor-corrector interior-point method.
//!
//! Fixed variables and empty rows are removed first, then every row is
//! scaled to unit infinity norm. Inequalities get explicit slacks; finite
//! bounds get their own slack/multiplier pairs and infinite ones are left out
//! of the barrier. Each Newton system is reduced to the quasi-definite form
//!
//! ```text
//! [ H + D + dp    A^T       G^T      ] [dx]
//! [ A            -dd        0        ] [dy]
//! [ G             0        -W - dd   ] [dz]
//! ```
//!
//! with `D = zl/sl + zu/su` and `W = s/z`, factored by sparse LDL^T and
//! polished by iterative refinement against the unregularized matrix.

use super::ldl::{Ldl, SymCsc};
use super::{
    dual_objective, kkt_residuals, Feasibility, QpError, QuadProgram, Solution, SolverConfig,
    SparseMatrix, Status,
};

const STATIC_REG_PRIMAL: f64 = 1e-9;
const STATIC_REG_DUAL: f64 = 1e-9;
const DYNAMIC_REG: f64 = 1e-8;
const STEP_FRACTION: f64 = 0.995;
const REFINE_STEPS: usize = 6;

/// Problem after presolve, with the maps needed to recover the original.
struct Reduced {
    n: usize,
    q: Vec<f64>,
    c: Vec<f64>,
    a: SparseMatrix,
    b: Vec<f64>,
    g: SparseMatrix,
    h: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    col_of: Vec<Option<usize>>,
    eq_rows: Vec<(usize, f64)>,
    in_rows: Vec<(usize, f64)>,
    obj_scale: f64,
}

fn presolve(p: &QuadProgram, feas_tol: f64) -> Option<Reduced> {
    let mut col_of = vec![None; p.n];
    let mut n = 0;
    for j in 0..p.n {
        if p.lower[j] != p.upper[j] {
            col_of[j] = Some(n);
            n += 1;
        }
    }
    let fixed_x: Vec<f64> = (0..p.n)
        .map(|j| if col_of[j].is_none() { p.lower[j] } else { 0.0 })
        .collect();

    let reduce_rows = |m: &SparseMatrix, rhs: &[f64], is_eq: bool| {
        let mut out = SparseMatrix::new(n);
        let mut new_rhs = Vec::new();
        let mut kept = Vec::new();
        for i in 0..m.nrows() {
            let mut shift = 0.0;
            let mut entries = Vec::new();
            for (j, v) in m.row(i) {
                match col_of[j] {
                    Some(nj) => entries.push((nj, v)),
                    None => shift += v * fixed_x[j],
                }
            }
            let r = rhs[i] - shift;
            let scale = entries.iter().fold(0.0f64, |s, e| s.max(e.1.abs()));
            if scale == 0.0 {
                let violated = if is_eq { r.abs() > feas_tol } else { r < -feas_tol };
                if violated {
                    return None;
                }
                continue;
            }
            entries.iter_mut().for_each(|e| e.1 /= scale);
            out.push_row(&entries);
            new_rhs.push(r / scale);
            kept.push((i, scale));
        }
        Some((out, new_rhs, kept))
    };
    let (a, b, eq_rows) = reduce_rows(&p.a_eq, &p.b_eq, true)?;
    let (g, h, in_rows) = reduce_rows(&p.g_ineq, &p.h_ineq, false)?;

    let pick = |v: &[f64]| -> Vec<f64> {
        (0..p.n).filter(|&j| col_of[j].is_some()).map(|j| v[j]).collect()
    };
    let q = pick(&p.q_diag);
    let c = pick(&p.c_lin);
    let obj_scale = q.iter().chain(&c).fold(1.0f64, |m, v| m.max(v.abs()));
    Some(Reduced {
        n,
        q: q.iter().map(|v| v / obj_scale).collect(),
        c: c.iter().map(|v| v / obj_scale).collect(),
        a,
        b,
        g,
        h,
        lo: pick(&p.lower),
        hi: pick(&p.upper),
        col_of,
        eq_rows,
        in_rows,
        obj_scale,
    })
}

/// Iterate on the reduced problem.
#[derive(Clone)]
struct State {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    zl: Vec<f64>,
    sl: Vec<f64>,
    zu: Vec<f64>,
    su: Vec<f64>,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dzl: Vec<f64>,
    dzu: Vec<f64>,
}

fn postsolve(p: &QuadProgram, r: &Reduced, st: &State, iterations: usize, status: Status) -> Solution {
    let mut x = vec![0.0; p.n];
    for j in 0..p.n {
        x[j] = match r.col_of[j] {
            Some(k) => st.x[k],
            None => p.lower[j],
        };
    }
    let mut y = vec![0.0; p.m_eq()];
    for (k, &(i, scale)) in r.eq_rows.iter().enumerate() {
        y[i] = r.obj_scale * st.y[k] / scale;
    }
    let mut z = vec![0.0; p.m_ineq()];
    for (k, &(i, scale)) in r.in_rows.iter().enumerate() {
        z[i] = r.obj_scale * st.z[k] / scale;
    }
    let mut w = vec![0.0; p.n];
    let mut fixed = false;
    for j in 0..p.n {
        match r.col_of[j] {
            Some(k) => w[j] = r.obj_scale * (st.zu[k] - st.zl[k]),
            None => fixed = true,
        }
    }
    if fixed {
        let mut grad: Vec<f64> = (0..p.n).map(|j| 2.0 * p.q_diag[j] * x[j] + p.c_lin[j]).collect();
        p.a_eq.mul_t_add(&y, &mut grad);
        p.g_ineq.mul_t_add(&z, &mut grad);
        for j in 0..p.n {
            if r.col_of[j].is_none() {
                w[j] = -grad[j];
            }
        }
    }
    Solution {
        objective: p.objective(&x),
        x,
        duals_eq: y,
        duals_ineq: z,
        duals_bound: w,
        status,
        iterations,
    }
}

fn initial_state(r: &Reduced) -> State {
    let x: Vec<f64> = (0..r.n)
        .map(|j| {
            let (lo, hi) = (r.lo[j], r.hi[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    let margin = (0.25 * (hi - lo)).min(1.0);
                    0.0f64.clamp(lo + margin, hi - margin)
                }
                (true, false) => 0.0f64.max(lo + 1.0),
                (false, true) => 0.0f64.min(hi - 1.0),
                (false, false) => 0.0,
            }
        })
        .collect();
    let gx = r.g.mul(&x);
    let s: Vec<f64> = gx.iter().zip(&r.h).map(|(g, h)| (h - g).max(1.0)).collect();
    let has_lo = |j: usize| r.lo[j].is_finite();
    let has_hi = |j: usize| r.hi[j].is_finite();
    State {
        sl: (0..r.n).map(|j| if has_lo(j) { x[j] - r.lo[j] } else { 0.0 }).collect(),
        su: (0..r.n).map(|j| if has_hi(j) { r.hi[j] - x[j] } else { 0.0 }).collect(),
        zl: (0..r.n).map(|j| if has_lo(j) { 1.0 } else { 0.0 }).collect(),
        zu: (0..r.n).map(|j| if has_hi(j) { 1.0 } else { 0.0 }).collect(),
        y: vec![0.0; r.b.len()],
        z: vec![1.0; r.h.len()],
        s,
        x,
    }
}

/// KKT matrix with a fixed pattern and its factorization.
struct Kkt {
    reg: SymCsc,
    exact: SymCsc,
    diag: Vec<usize>,
    ldl: Ldl,
    n: usize,
    me: usize,
}

impl Kkt {
    fn new(r: &Reduced) -> Self {
        let (n, me, mi) = (r.n, r.b.len(), r.h.len());
        let mut trip = Vec::with_capacity(r.a.nnz() + r.g.nnz());
        for i in 0..me {
            trip.extend(r.a.row(i).map(|(j, v)| (j, n + i, v)));
        }
        for i in 0..mi {
            trip.extend(r.g.row(i).map(|(j, v)| (j, n + me + i, v)));
        }
        let size = n + me + mi;
        let reg = SymCsc::from_triplets(size, &trip);
        let diag = (0..size).map(|k| reg.position(k, k).unwrap()).collect();
        let signs: Vec<f64> = (0..size).map(|k| if k < n { 1.0 } else { -1.0 }).collect();
        let ldl = Ldl::analyse(&reg, &signs);
        Self {
            exact: reg.clone(),
            reg,
            diag,
            ldl,
            n,
            me,
        }
    }

    fn factor(&mut self, r: &Reduced, st: &State) -> Result<(), QpError> {
        let (n, me) = (self.n, self.me);
        for j in 0..n {
            let mut d = 2.0 * r.q[j];
            if r.lo[j].is_finite() {
                d += st.zl[j] / st.sl[j];
            }
            if r.hi[j].is_finite() {
                d += st.zu[j] / st.su[j];
            }
            self.exact.values[self.diag[j]] = d;
            self.reg.values[self.diag[j]] = d + STATIC_REG_PRIMAL;
        }
        for i in 0..me {
            self.exact.values[self.diag[n + i]] = 0.0;
            self.reg.values[self.diag[n + i]] = -STATIC_REG_DUAL;
        }
        for (i, (&s, &z)) in st.s.iter().zip(&st.z).enumerate() {
            let w = s / z;
            self.exact.values[self.diag[n + me + i]] = -w;
            self.reg.values[self.diag[n + me + i]] = -w - STATIC_REG_DUAL;
        }
        self.ldl
            .factor(&self.reg, DYNAMIC_REG)
            .map(|_| ())
            .map_err(|e| QpError::Numerical(format!("zero pivot at index {}", e.0)))
    }

    /// Solve with iterative refinement against the unregularized matrix.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut sol = rhs.to_vec();
        self.ldl.solve(&mut sol);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut best = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            let k_sol = self.exact.mul(&sol);
            let mut res: Vec<f64> = rhs.iter().zip(&k_sol).map(|(b, k)| b - k).collect();
            let norm = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(norm < best) || norm <= 1e-15 * (1.0 + scale) {
                break;
            }
            best = norm;
            self.ldl.solve(&mut res);
            let candidate: Vec<f64> = sol.iter().zip(&res).map(|(a, b)| a + b).collect();
            let k_cand = self.exact.mul(&candidate);
            let cand_norm = rhs
                .iter()
                .zip(&k_cand)
                .fold(0.0f64, |m, (b, k)| m.max((b - k).abs()));
            if cand_norm >= norm {
                break;
            }
            sol = candidate;
        }
        sol
    }
}

struct Residuals {
    rd: Vec<f64>,
    rp: Vec<f64>,
    rg: Vec<f64>,
}

fn residuals(r: &Reduced, st: &State) -> Residuals {
    let mut rd: Vec<f64> = (0..r.n).map(|j| 2.0 * r.q[j] * st.x[j] + r.c[j]).collect();
    r.a.mul_t_add(&st.y, &mut rd);
    r.g.mul_t_add(&st.z, &mut rd);
    for j in 0..r.n {
        rd[j] += st.zu[j] - st.zl[j];
    }
    let rp = r.a.mul(&st.x).iter().zip(&r.b).map(|(a, b)| a - b).collect();
    let rg = r
        .g
        .mul(&st.x)
        .iter()
        .zip(&st.s)
        .zip(&r.h)
        .map(|((g, s), h)| g + s - h)
        .collect();
    Residuals { rd, rp, rg }
}

fn newton(
    r: &Reduced,
    kkt: &Kkt,
    st: &State,
    res: &Residuals,
    rcg: &[f64],
    rcl: &[f64],
    rcu: &[f64],
) -> Direction {
    let (n, me) = (r.n, r.b.len());
    let mut rhs = Vec::with_capacity(n + me + r.h.len());
    for j in 0..n {
        let mut v = -res.rd[j];
        if r.lo[j].is_finite() {
            v -= rcl[j] / st.sl[j];
        }
        if r.hi[j].is_finite() {
            v += rcu[j] / st.su[j];
        }
        rhs.push(v);
    }
    rhs.extend(res.rp.iter().map(|v| -v));
    rhs.extend((0..r.h.len()).map(|i| -res.rg[i] + rcg[i] / st.z[i]));
    let sol = kkt.solve(&rhs);
    let dx = sol[..n].to_vec();
    let dy = sol[n..n + me].to_vec();
    let dz = sol[n + me..].to_vec();
    let ds = (0..r.h.len()).map(|i| (-rcg[i] - st.s[i] * dz[i]) / st.z[i]).collect();
    let dzl = (0..n)
        .map(|j| if r.lo[j].is_finite() { (-rcl[j] - st.zl[j] * dx[j]) / st.sl[j] } else { 0.0 })
        .collect();
    let dzu = (0..n)
        .map(|j| if r.hi[j].is_finite() { (-rcu[j] + st.zu[j] * dx[j]) / st.su[j] } else { 0.0 })
        .collect();
    Direction { dx, dy, dz, ds, dzl, dzu }
}

fn max_step(v: &[f64], dv: &[f64], active: impl Fn(usize) -> bool) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..v.len() {
        if active(i) && dv[i] < 0.0 {
            alpha = alpha.min(-v[i] / dv[i]);
        }
    }
    alpha
}

fn step_lengths(r: &Reduced, st: &State, d: &Direction) -> (f64, f64) {
    let lo = |j: usize| r.lo[j].is_finite();
    let hi = |j: usize| r.hi[j].is_finite();
    let neg_dx: Vec<f64> = d.dx.iter().map(|v| -v).collect();
    let ap = max_step(&st.s, &d.ds, |_| true)
        .min(max_step(&st.sl, &d.dx, lo))
        .min(max_step(&st.su, &neg_dx, hi));
    let ad = max_step(&st.z, &d.dz, |_| true)
        .min(max_step(&st.zl, &d.dzl, lo))
        .min(max_step(&st.zu, &d.dzu, hi));
    (ap, ad)
}

fn complementarity(r: &Reduced, st: &State) -> (f64, usize) {
    let mut sum: f64 = st.s.iter().zip(&st.z).map(|(s, z)| s * z).sum();
    let mut count = st.s.len();
    for j in 0..r.n {
        if r.lo[j].is_finite() {
            sum += st.sl[j] * st.zl[j];
            count += 1;
        }
        if r.hi[j].is_finite() {
            sum += st.su[j] * st.zu[j];
            count += 1;
        }
    }
    (sum, count)
}

fn apply(r: &Reduced, st: &mut State, d: &Direction, ap: f64, ad: f64) {
    for j in 0..r.n {
        st.x[j] += ap * d.dx[j];
        if r.lo[j].is_finite() {
            st.sl[j] += ap * d.dx[j];
            st.zl[j] += ad * d.dzl[j];
        }
        if r.hi[j].is_finite() {
            st.su[j] -= ap * d.dx[j];
            st.zu[j] += ad * d.dzu[j];
        }
    }
    for i in 0..st.s.len() {
        st.s[i] += ap * d.ds[i];
        st.z[i] += ad * d.dz[i];
    }
    for i in 0..st.y.len() {
        st.y[i] += ad * d.dy[i];
    }
}

enum Outcome {
    Optimal(Solution),
    Stopped(Solution),
    Infeasible,
    MaxIter(Solution),
}

fn converged(p: &QuadProgram, s: &Solution, cfg: &SolverConfig) -> bool {
    let Ok(k) = kkt_residuals(p, s) else {
        return false;
    };
    let gap = (s.objective - dual_objective(p, s)).abs();
    k.r_stat <= cfg.tol_dual
        && k.r_feas <= cfg.tol_primal
        && k.r_comp <= cfg.tol_gap
        && gap <= cfg.tol_gap * (1.0 + s.objective.abs())
}

/// Run the interior-point iteration on `r`, judging convergence on the
/// original program `p`.
///
/// `stop` may end the run early at any iterate. `on_stall` is called once
/// when progress on primal feasibility stalls; returning `true` reports the
/// program infeasible.
fn run(
    p: &QuadProgram,
    r: &Reduced,
    cfg: &SolverConfig,
    stop: &mut dyn FnMut(&Solution) -> bool,
    on_stall: &mut dyn FnMut() -> Result<bool, QpError>,
) -> Result<Outcome, QpError> {
    let mut st = initial_state(r);
    let mut kkt = Kkt::new(r);
    let quadratic = r.q.iter().any(|&q| q > 0.0);
    let mut stall_checked = false;
    let mut feas_history: Vec<f64> = Vec::new();
    let mut tiny_steps = 0;

    for iter in 0..=cfg.max_iter {
        let sol = postsolve(p, r, &st, iter, Status::Optimal);
        if converged(p, &sol, cfg) {
            return Ok(Outcome::Optimal(sol));
        }
        if stop(&sol) {
            return Ok(Outcome::Stopped(sol));
        }
        if iter == cfg.max_iter {
            break;
        }

        let res = residuals(r, &st);
        let rp_norm = res
            .rp
            .iter()
            .chain(&res.rg)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        feas_history.push(rp_norm);
        let stalled_feas = iter >= 15 && {
            let past = feas_history[iter - 10];
            rp_norm > 1e-9 && rp_norm > 0.9 * past
        };
        if (stalled_feas || tiny_steps >= 3) && !stall_checked {
            stall_checked = true;
            if on_stall()? {
                return Ok(Outcome::Infeasible);
            }
        }

        kkt.factor(r, &st)?;
        let (sum, count) = complementarity(r, &st);
        let mu = if count > 0 { sum / count as f64 } else { 0.0 };

        let rcg: Vec<f64> = st.s.iter().zip(&st.z).map(|(s, z)| s * z).collect();
        let rcl: Vec<f64> = st.sl.iter().zip(&st.zl).map(|(s, z)| s * z).collect();
        let rcu: Vec<f64> = st.su.iter().zip(&st.zu).map(|(s, z)| s * z).collect();
        let aff = newton(r, &kkt, &st, &res, &rcg, &rcl, &rcu);

        let dir = if count == 0 {
            aff
        } else {
            let (ap, ad) = step_lengths(r, &st, &aff);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let (ap, ad) = if quadratic { (ap.min(ad), ap.min(ad)) } else { (ap, ad) };
            let mut trial = st.clone();
            apply(r, &mut trial, &aff, ap, ad);
            let mu_aff = complementarity(r, &trial).0 / count as f64;
            let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
            let target = sigma * mu;
            let lo = |j: usize| r.lo[j].is_finite();
            let hi = |j: usize| r.hi[j].is_finite();
            let rcg: Vec<f64> = (0..st.s.len())
                .map(|i| st.s[i] * st.z[i] + aff.ds[i] * aff.dz[i] - target)
                .collect();
            let rcl: Vec<f64> = (0..r.n)
                .map(|j| if lo(j) { st.sl[j] * st.zl[j] + aff.dx[j] * aff.dzl[j] - target } else { 0.0 })
                .collect();
            let rcu: Vec<f64> = (0..r.n)
                .map(|j| if hi(j) { st.su[j] * st.zu[j] - aff.dx[j] * aff.dzu[j] - target } else { 0.0 })
                .collect();
            newton(r, &kkt, &st, &res, &rcg, &rcl, &rcu)
        };

        let (ap, ad) = if count == 0 {
            (1.0, 1.0)
        } else {
            let (ap, ad) = step_lengths(r, &st, &dir);
            let (ap, ad) = ((STEP_FRACTION * ap).min(1.0), (STEP_FRACTION * ad).min(1.0));
            if quadratic {
                (ap.min(ad), ap.min(ad))
            } else {
                (ap, ad)
            }
        };
        if ap.max(ad) < 1e-10 {
            tiny_steps += 1;
        } else {
            tiny_steps = 0;
        }
        apply(r, &mut st, &dir, ap, ad);
        if st.x.iter().chain(&st.y).chain(&st.z).any(|v| !v.is_finite()) {
            return Err(QpError::Numerical("non-finite iterate".into()));
        }
    }
    if !stall_checked && on_stall()? {
        return Ok(Outcome::Infeasible);
    }
    Ok(Outcome::MaxIter(postsolve(p, r, &st, cfg.max_iter, Status::MaxIter)))
}

fn infeasible_solution(p: &QuadProgram, x: Vec<f64>, iterations: usize) -> Solution {
    Solution {
        x,
        duals_eq: vec![0.0; p.m_eq()],
        duals_ineq: vec![0.0; p.m_ineq()],
        duals_bound: vec![0.0; p.n],
        objective: f64::INFINITY,
        status: Status::Infeasible,
        iterations,
    }
}

pub(super) fn solve(p: &QuadProgram, cfg: &SolverConfig) -> Result<Solution, QpError> {
    let Some(r) = presolve(p, cfg.feas_tol) else {
        let x = (0..p.n).map(|j| p.lower[j].max(p.upper[j].min(0.0))).collect();
        return Ok(infeasible_solution(p, x, 0));
    };
    let mut phase1_x: Option<Vec<f64>> = None;
    let mut on_stall = || -> Result<bool, QpError> {
        let (verdict, x) = phase1(p, cfg)?;
        phase1_x = Some(x);
        Ok(verdict == Feasibility::Infeasible)
    };
    let outcome = run(p, &r, cfg, &mut |_| false, &mut on_stall)?;
    Ok(match outcome {
        Outcome::Optimal(s) | Outcome::Stopped(s) | Outcome::MaxIter(s) => s,
        Outcome::Infeasible => {
            let x = phase1_x.unwrap_or_else(|| vec![0.0; p.n]);
            infeasible_solution(p, x, cfg.max_iter)
        }
    })
}

/// Total violation of `p`'s rows at `x`, each row scaled to unit
/// infinity norm. Bounds are assumed to hold.
fn violation(p: &QuadProgram, x: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..p.m_eq() {
        let scale = p.a_eq.row_norm_inf(i).max(f64::MIN_POSITIVE);
        let scale = if p.a_eq.row(i).next().is_none() { 1.0 } else { scale };
        total += (p.a_eq.row_dot(i, x) - p.b_eq[i]).abs() / scale;
    }
    for i in 0..p.m_ineq() {
        let scale = if p.g_ineq.row(i).next().is_none() { 1.0 } else { p.g_ineq.row_norm_inf(i) };
        total += ((p.g_ineq.row_dot(i, x) - p.h_ineq[i]) / scale).max(0.0);
    }
    total
}

/// Minimize total scaled constraint violation over the bound box.
///
/// Returns the verdict and the last primal point in the original variables.
pub(super) fn phase1(p: &QuadProgram, cfg: &SolverConfig) -> Result<(Feasibility, Vec<f64>), QpError> {
    let (me, mi) = (p.m_eq(), p.m_ineq());
    let n1 = p.n + 2 * me + mi;
    let mut f = QuadProgram::new(n1);
    for j in 0..p.n {
        f.set_bounds(j, p.lower[j], p.upper[j]);
    }
    for j in p.n..n1 {
        f.set_bounds(j, 0.0, f64::INFINITY);
        f.c_lin[j] = 1.0;
    }
    for i in 0..me {
        let scale = match p.a_eq.row_norm_inf(i) {
            s if s > 0.0 => s,
            _ => 1.0,
        };
        let mut entries: Vec<(usize, f64)> = p.a_eq.row(i).map(|(j, v)| (j, v / scale)).collect();
        entries.push((p.n + i, 1.0));
        entries.push((p.n + me + i, -1.0));
        f.add_eq(&entries, p.b_eq[i] / scale);
    }
    for i in 0..mi {
        let scale = match p.g_ineq.row_norm_inf(i) {
            s if s > 0.0 => s,
            _ => 1.0,
        };
        let mut entries: Vec<(usize, f64)> = p.g_ineq.row(i).map(|(j, v)| (j, v / scale)).collect();
        entries.push((p.n + 2 * me + i, -1.0));
        f.add_ineq(&entries, p.h_ineq[i] / scale);
    }

    let Some(r) = presolve(&f, cfg.feas_tol) else {
        return Ok((Feasibility::Infeasible, vec![0.0; p.n]));
    };
    let mut stop = |s: &Solution| violation(p, &s.x[..p.n]) <= cfg.feas_tol;
    let outcome = run(&f, &r, cfg, &mut stop, &mut || Ok(false))?;
    match outcome {
        Outcome::Stopped(s) => Ok((Feasibility::Feasible, s.x[..p.n].to_vec())),
        Outcome::Optimal(s) => {
            let v = violation(p, &s.x[..p.n]).min(s.objective);
            let verdict = if v <= cfg.feas_tol {
                Feasibility::Feasible
            } else {
                Feasibility::Infeasible
            };
            Ok((verdict, s.x[..p.n].to_vec()))
        }
        Outcome::MaxIter(_) | Outcome::Infeasible => Err(QpError::Phase1Failed(cfg.max_iter)),
    }
}
