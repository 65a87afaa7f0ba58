//! Policy design: bisection on the common ratio requirement, cost-aware
//! sweeps over it, and Pareto fronts across the cost weight.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::Scenario;
use crate::problems::{build_p3, evaluate_f_tau, solve_p1, FTau, OperationReport, ProblemError};
use crate::qp::{check_feasibility, Feasibility, QpError, SolverConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(String),
    #[error("requirement {0} at the lower bracket end is already infeasible")]
    BracketInvalid(f64),
    #[error("the base case without ratio requirements is infeasible")]
    BaselineInfeasible,
    #[error("every requirement on the sweep mesh is infeasible")]
    AllInfeasible,
    #[error("zeta must be finite and positive, got {0}")]
    InvalidZeta(f64),
    #[error("requirement {0} was judged feasible but the cost problem could not be solved there")]
    InconsistentProbe(f64),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Default weight grid: 25 points, logarithmic from 1e-2 to 1e4.
pub fn default_zeta_grid() -> Vec<f64> {
    (-8..=16).map(|k| 10f64.powf(k as f64 / 4.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    /// Bisection stops once the bracket is no wider than this.
    pub epsilon: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
    /// Sweep step for the cost-aware design.
    pub mesh: f64,
    /// Local passes at mesh/10, mesh/100, ... around the incumbent.
    pub refine_rounds: usize,
    pub zeta_grid: Vec<f64>,
    /// Double `tau_hi` until infeasible before bisecting.
    pub expand_bracket: bool,
    /// Sweep values within this relative distance of the best count as tied.
    pub tie_tol: f64,
    /// Worker threads for sweeps; `None` uses the global pool.
    pub threads: Option<usize>,
    pub solver: SolverConfig,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            tau_lo: 0.0,
            tau_hi: 1.0,
            mesh: 0.01,
            refine_rounds: 1,
            zeta_grid: default_zeta_grid(),
            expand_bracket: false,
            tie_tol: 1e-8,
            threads: None,
            solver: SolverConfig::default(),
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = |msg: String| Err(PolicyError::InvalidConfig(msg));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.tau_lo >= 0.0 && self.tau_lo < self.tau_hi && self.tau_hi.is_finite()) {
            return bad(format!("need 0 <= tau_lo < tau_hi, got [{}, {}]", self.tau_lo, self.tau_hi));
        }
        if !(self.mesh > 0.0 && self.mesh.is_finite()) {
            return bad(format!("mesh must be positive, got {}", self.mesh));
        }
        if !(self.tie_tol >= 0.0) {
            return bad(format!("tie_tol must be nonnegative, got {}", self.tie_tol));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        self.solver.validate()?;
        Ok(())
    }

    fn validate_zeta_grid(&self) -> Result<(), PolicyError> {
        if self.zeta_grid.is_empty() {
            return Err(PolicyError::InvalidConfig("zeta grid is empty".into()));
        }
        if let Some(&z) = self.zeta_grid.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
            return Err(PolicyError::InvalidZeta(z));
        }
        if self.zeta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolicyError::InvalidConfig("zeta grid must be strictly increasing".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<Option<rayon::ThreadPool>, PolicyError> {
        self.threads
            .map(|n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| PolicyError::ThreadPool(e.to_string()))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    P2,
    P4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub tau: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub tau: f64,
    /// Negative infinity marks an infeasible requirement.
    #[serde(with = "crate::nonfinite")]
    pub f_tau: f64,
    #[serde(with = "crate::nonfinite")]
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "points", rename_all = "lowercase")]
pub enum Trace {
    Bisection(Vec<Probe>),
    Sweep(Vec<SweepPoint>),
}

impl Trace {
    pub fn len(&self) -> usize {
        match self {
            Trace::Bisection(p) => p.len(),
            Trace::Sweep(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `tau,feasible` for bisection, `tau,f_tau,cost` for sweeps, in
    /// evaluation order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Trace::Bisection(probes) => {
                out.push_str("tau,feasible\n");
                for p in probes {
                    let _ = writeln!(out, "{:?},{}", p.tau, p.feasible);
                }
            }
            Trace::Sweep(points) => {
                out.push_str("tau,f_tau,cost\n");
                for p in points {
                    let _ = writeln!(out, "{:?},{},{}", p.tau, fmt_float(p.f_tau), fmt_float(p.cost));
                }
            }
        }
        out
    }
}

/// Shortest round-tripping form; infinities as `inf` / `-inf`.
pub(crate) fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub kind: PolicyKind,
    pub tau_star: f64,
    /// Sweep objective at the optimum; cost-aware design only.
    pub f_star: Option<f64>,
    pub zeta: Option<f64>,
    pub cost: f64,
    pub baseline_cost: f64,
    #[serde(with = "crate::nonfinite")]
    pub cost_normalized: f64,
    pub report: OperationReport,
    pub trace: Trace,
}

/// True when no feasible probe lies above an infeasible one.
pub fn probes_are_monotone(probes: &[Probe]) -> bool {
    let lowest_infeasible = probes
        .iter()
        .filter(|p| !p.feasible)
        .map(|p| p.tau)
        .fold(f64::INFINITY, f64::min);
    probes.iter().all(|p| !p.feasible || p.tau < lowest_infeasible)
}

/// Cost over the baseline; a zero baseline maps zero cost to 1.
pub fn normalize_cost(cost: f64, baseline: f64) -> f64 {
    if baseline > 0.0 {
        cost / baseline
    } else if cost.abs() <= 1e-12 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Least-cost operation without ratio requirements.
pub fn baseline(s: &Scenario, cfg: &PolicyConfig) -> Result<(f64, OperationReport), PolicyError> {
    match solve_p1(s, &vec![0.0; s.partition.len()], &cfg.solver)? {
        Some((report, sol)) => Ok((sol.objective, report)),
        None => Err(PolicyError::BaselineInfeasible),
    }
}

fn probe(s: &Scenario, tau: f64, cfg: &PolicyConfig, trace: &mut Vec<Probe>) -> Result<bool, PolicyError> {
    let (p, _) = build_p3(s, tau)?;
    let feasible = check_feasibility(&p, &cfg.solver)? == Feasibility::Feasible;
    trace.push(Probe { tau, feasible });
    Ok(feasible)
}

/// Largest common ratio requirement that every energyshed can meet.
///
/// Bisects `[tau_lo, tau_hi]` on feasibility. The lower end is only probed
/// if no midpoint turns out feasible, so a bracket of width `w` costs
/// `ceil(log2(w / epsilon))` probes in the usual case. `tau_star` is the
/// final feasible lower end.
pub fn solve_p2(s: &Scenario, cfg: &PolicyConfig) -> Result<PolicyResult, PolicyError> {
    cfg.validate()?;
    let mut trace = Vec::new();
    let (mut lo, mut hi) = (cfg.tau_lo, cfg.tau_hi);
    let mut lo_known = false;

    if cfg.expand_bracket {
        while probe(s, hi, cfg, &mut trace)? {
            if hi > 1e6 {
                return Err(PolicyError::InvalidConfig("bracket expansion did not terminate".into()));
            }
            lo = hi;
            lo_known = true;
            hi *= 2.0;
        }
    }
    while hi - lo > cfg.epsilon {
        let mid = 0.5 * (lo + hi);
        if probe(s, mid, cfg, &mut trace)? {
            lo = mid;
            lo_known = true;
        } else {
            hi = mid;
        }
    }
    if !lo_known && !probe(s, lo, cfg, &mut trace)? {
        return Err(PolicyError::BracketInvalid(lo));
    }

    let (baseline_cost, _) = baseline(s, cfg)?;
    // The feasibility test admits violations up to its tolerance, so an end
    // point on the boundary may be out of reach for the optimizer. Stepping
    // back by epsilon keeps the bracket, since lo + epsilon >= hi.
    let mut attempt = 0;
    let (report, sol) = loop {
        match solve_p1(s, &vec![lo; s.partition.len()], &cfg.solver) {
            Ok(Some(found)) => break found,
            Ok(None) | Err(ProblemError::NotOptimal(_)) if attempt < 3 && lo - cfg.epsilon >= cfg.tau_lo => {
                attempt += 1;
                lo -= cfg.epsilon;
            }
            Ok(None) => return Err(PolicyError::InconsistentProbe(lo)),
            Err(e) => return Err(e.into()),
        }
    };
    Ok(PolicyResult {
        kind: PolicyKind::P2,
        tau_star: lo,
        f_star: None,
        zeta: None,
        cost: sol.objective,
        baseline_cost,
        cost_normalized: normalize_cost(sol.objective, baseline_cost),
        report,
        trace: Trace::Bisection(trace),
    })
}

/// Memo of cost evaluations keyed by the exact requirement value; sweeps for
/// different weights share it because the cost does not depend on zeta.
#[derive(Default)]
struct CostCache {
    entries: Mutex<HashMap<u64, Option<(f64, OperationReport)>>>,
}

impl CostCache {
    fn evaluate(&self, s: &Scenario, taus: &[f64], cfg: &PolicyConfig, pool: Option<&rayon::ThreadPool>) -> Result<(), PolicyError> {
        let missing: Vec<f64> = {
            let entries = self.entries.lock().unwrap();
            taus.iter().copied().filter(|t| !entries.contains_key(&t.to_bits())).collect()
        };
        // any positive zeta gives the same cost
        let run = || -> Vec<Result<FTau, ProblemError>> {
            missing.par_iter().map(|&tau| evaluate_f_tau(s, tau, 1.0, &cfg.solver)).collect()
        };
        let results = match pool {
            Some(pool) => pool.install(run),
            None => run(),
        };
        let mut entries = self.entries.lock().unwrap();
        for (tau, result) in missing.iter().zip(results) {
            let point = result?;
            entries.insert(tau.to_bits(), point.report.map(|r| (point.cost, r)));
        }
        Ok(())
    }

    fn cost(&self, tau: f64) -> Option<(f64, OperationReport)> {
        self.entries.lock().unwrap().get(&tau.to_bits()).cloned().flatten()
    }
}

fn mesh_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|j| lo + j as f64 * step).collect();
    if hi - pts[n] > 1e-9 * step {
        pts.push(hi);
    } else {
        pts[n] = hi;
    }
    pts
}

fn sweep_point(cache: &CostCache, tau: f64, zeta: f64) -> SweepPoint {
    match cache.cost(tau) {
        Some((cost, _)) => SweepPoint { tau, f_tau: tau - cost / zeta, cost },
        None => SweepPoint { tau, f_tau: f64::NEG_INFINITY, cost: f64::INFINITY },
    }
}

/// Best point; values within `tie_tol` (relative) of the maximum are tied
/// and the smallest requirement among them wins.
fn argmax(points: &[SweepPoint], tie_tol: f64) -> Option<SweepPoint> {
    let best = points
        .iter()
        .map(|p| p.f_tau)
        .filter(|f| f.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let slack = tie_tol * best.abs().max(1.0);
    points
        .iter()
        .filter(|p| p.f_tau >= best - slack)
        .min_by(|a, b| a.tau.total_cmp(&b.tau))
        .copied()
}

fn solve_p4_cached(
    s: &Scenario,
    zeta: f64,
    cfg: &PolicyConfig,
    cache: &CostCache,
    pool: Option<&rayon::ThreadPool>,
) -> Result<PolicyResult, PolicyError> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(PolicyError::InvalidZeta(zeta));
    }
    let grid = mesh_points(cfg.tau_lo, cfg.tau_hi, cfg.mesh);
    cache.evaluate(s, &grid, cfg, pool)?;
    let mut points: Vec<SweepPoint> = grid.iter().map(|&t| sweep_point(cache, t, zeta)).collect();
    let mut best = argmax(&points, cfg.tie_tol).ok_or(PolicyError::AllInfeasible)?;

    let mut step = cfg.mesh;
    for _ in 0..cfg.refine_rounds {
        let fine = step / 10.0;
        let lo = (best.tau - step).max(cfg.tau_lo);
        let hi = (best.tau + step).min(cfg.tau_hi);
        let local: Vec<f64> = mesh_points(lo, hi, fine)
            .into_iter()
            .filter(|t| points.iter().all(|p| (p.tau - t).abs() > 1e-12 * fine))
            .collect();
        cache.evaluate(s, &local, cfg, pool)?;
        points.extend(local.iter().map(|&t| sweep_point(cache, t, zeta)));
        best = argmax(&points, cfg.tie_tol).ok_or(PolicyError::AllInfeasible)?;
        step = fine;
    }

    let (baseline_cost, _) = match cache.cost(0.0) {
        Some(hit) if cfg.tau_lo == 0.0 => hit,
        _ => baseline(s, cfg)?,
    };
    let (cost, report) = cache.cost(best.tau).ok_or(PolicyError::AllInfeasible)?;
    Ok(PolicyResult {
        kind: PolicyKind::P4,
        tau_star: best.tau,
        f_star: Some(best.f_tau),
        zeta: Some(zeta),
        cost,
        baseline_cost,
        cost_normalized: normalize_cost(cost, baseline_cost),
        report,
        trace: Trace::Sweep(points),
    })
}

/// Cost-aware design: maximize `tau - cost(tau) / zeta` over the mesh.
///
/// Infeasible mesh points score negative infinity. After the mesh pass,
/// `refine_rounds` local sweeps at a tenth of the previous step run around
/// the incumbent. The trace lists every evaluation: mesh points in order,
/// then each refinement pass.
pub fn solve_p4(s: &Scenario, zeta: f64, cfg: &PolicyConfig) -> Result<PolicyResult, PolicyError> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    solve_p4_cached(s, zeta, cfg, &CostCache::default(), pool.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub zeta: f64,
    pub tau_star: f64,
    #[serde(with = "crate::nonfinite")]
    pub cost_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub points: Vec<ParetoPoint>,
    pub baseline_cost: f64,
}

impl ParetoFront {
    /// Whether the optimal requirement is nondecreasing in zeta, allowing
    /// slack of one refined mesh step.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.points.windows(2).all(|w| w[1].tau_star >= w[0].tau_star - slack)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("zeta,tau_star,cost_normalized\n");
        for p in &self.points {
            let _ = writeln!(out, "{:?},{:?},{}", p.zeta, p.tau_star, fmt_float(p.cost_normalized));
        }
        out
    }
}

/// Cost-aware designs across `cfg.zeta_grid`, in grid order. Cost
/// evaluations are shared between weights.
pub fn pareto_front(s: &Scenario, cfg: &PolicyConfig) -> Result<ParetoFront, PolicyError> {
    cfg.validate()?;
    cfg.validate_zeta_grid()?;
    let pool = cfg.pool()?;
    let cache = CostCache::default();
    let mut points = Vec::with_capacity(cfg.zeta_grid.len());
    let mut baseline_cost = 0.0;
    for &zeta in &cfg.zeta_grid {
        let r = solve_p4_cached(s, zeta, cfg, &cache, pool.as_ref())?;
        baseline_cost = r.baseline_cost;
        points.push(ParetoPoint {
            zeta,
            tau_star: r.tau_star,
            cost_normalized: r.cost_normalized,
        });
    }
    Ok(ParetoFront { points, baseline_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::*;

    /// Two single-bus sheds; only bus 2 has flexibility.
    fn pair(cap: f64) -> Scenario {
        let steps = 2;
        let network = Network {
            buses: vec![
                Bus { id: 1, has_load: true, nominal_load_mw: 0.0 },
                Bus { id: 2, has_load: true, nominal_load_mw: 0.0 },
            ],
            branches: vec![Branch { from: 1, to: 2, reactance: 0.1, flow_limit: f64::INFINITY }],
            base_mva: 100.0,
            reference_bus: 1,
        };
        let mut s = Scenario {
            name: "pair".into(),
            network,
            time_grid: TimeGrid { steps, step_hours: 1.0 },
            profiles: Profiles {
                gen: BusTimeMatrix::from_rows(vec![vec![1.5, 1.5], vec![0.2, 0.2]]),
                load: BusTimeMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]),
            },
            budgets: FlexBudget {
                cap_plus: BusTimeMatrix::from_rows(vec![vec![0.0, 0.0], vec![cap, cap]]),
                cap_minus: BusTimeMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.0, 0.0]]),
                export_limit: None,
            },
            weights: CostWeights { alpha: vec![1.0, 1.0], beta: vec![1.0, 1.0] },
            partition: Partition::from_bus_sets(vec![vec![1], vec![2]]),
            flex_only_at_load_buses: true,
        };
        s.refresh_load_flags();
        s
    }

    #[test]
    fn config_validation() {
        let ok = PolicyConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.zeta_grid.len(), 25);
        for bad in [
            PolicyConfig { epsilon: 0.0, ..ok.clone() },
            PolicyConfig { tau_lo: 1.0, ..ok.clone() },
            PolicyConfig { mesh: -0.1, ..ok.clone() },
            PolicyConfig { threads: Some(0), ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(PolicyError::InvalidConfig(_))));
        }
        let unsorted = PolicyConfig { zeta_grid: vec![1.0, 0.5], ..ok.clone() };
        assert!(unsorted.validate_zeta_grid().is_err());
        let negative = PolicyConfig { zeta_grid: vec![-1.0], ..ok };
        assert_eq!(negative.validate_zeta_grid(), Err(PolicyError::InvalidZeta(-1.0)));
    }

    #[test]
    fn mesh_includes_both_ends() {
        let pts = mesh_points(0.0, 1.0, 0.01);
        assert_eq!(pts.len(), 101);
        assert_eq!(pts[100], 1.0);
        assert_eq!(mesh_points(0.0, 0.25, 0.1), vec![0.0, 0.1, 0.2, 0.25]);
    }

    #[test]
    fn ties_prefer_smaller_tau() {
        let pts = [
            SweepPoint { tau: 0.3, f_tau: 1.0, cost: 0.0 },
            SweepPoint { tau: 0.1, f_tau: 1.0, cost: 0.0 },
            SweepPoint { tau: 0.2, f_tau: f64::NEG_INFINITY, cost: f64::INFINITY },
        ];
        assert_eq!(argmax(&pts, 0.0).unwrap().tau, 0.1);
        assert!(argmax(&pts[2..], 0.0).is_none());
    }

    #[test]
    fn monotone_probe_check() {
        let p = |tau, feasible| Probe { tau, feasible };
        assert!(probes_are_monotone(&[p(0.5, true), p(0.75, false), p(0.6, true)]));
        assert!(!probes_are_monotone(&[p(0.5, false), p(0.75, true)]));
    }

    #[test]
    fn bisection_matches_bound() {
        // bus 2 alone can reach (0.2*2 + 2*cap) / 2 = 0.2 + cap; bus 1 is rich
        let s = pair(0.3);
        let r = solve_p2(&s, &PolicyConfig::default()).unwrap();
        assert!((r.tau_star - 0.5).abs() <= 1e-6, "{}", r.tau_star);
        let Trace::Bisection(probes) = &r.trace else { panic!() };
        assert!(probes.len() <= 20);
        assert!(probes_are_monotone(probes));
        assert!(r.cost_normalized >= 1.0 - 1e-6);
    }

    #[test]
    fn bracket_expansion() {
        let s = pair(2.0);
        let cfg = PolicyConfig { expand_bracket: true, ..Default::default() };
        let r = solve_p2(&s, &cfg).unwrap();
        // balance ties bus 2's added generation to bus 1's added demand x:
        // min(1.5 / (1 + x), 0.5 + x) peaks at x = 0.5 with both ratios 1
        assert!((r.tau_star - 1.0).abs() <= 1e-6, "{}", r.tau_star);
        let Trace::Bisection(probes) = &r.trace else { panic!() };
        assert_eq!(probes[0], Probe { tau: 1.0, feasible: true });
        assert!(!probes[1].feasible);
    }

    #[test]
    fn infeasible_lower_end() {
        let s = pair(0.0);
        let cfg = PolicyConfig { tau_lo: 0.5, ..Default::default() };
        assert_eq!(solve_p2(&s, &cfg).unwrap_err(), PolicyError::BracketInvalid(0.5));
    }

    #[test]
    fn sweep_limits() {
        let s = pair(0.3);
        let cfg = PolicyConfig::default();
        let big = solve_p4(&s, 1e9, &cfg).unwrap();
        assert!((big.tau_star - 0.5).abs() <= 0.01);
        let small = solve_p4(&s, 1e-9, &cfg).unwrap();
        assert!(small.cost_normalized <= 1.0 + 1e-4);
        let Trace::Sweep(points) = &big.trace else { panic!() };
        assert!(points.len() >= 101);
        assert!(points.iter().filter(|p| p.tau > 0.5 + 1e-9).all(|p| p.f_tau == f64::NEG_INFINITY));
    }

    #[test]
    fn threads_do_not_change_results() {
        let s = pair(0.3);
        let one = PolicyConfig { threads: Some(1), zeta_grid: vec![0.1, 1.0, 10.0], ..Default::default() };
        let four = PolicyConfig { threads: Some(4), ..one.clone() };
        assert_eq!(pareto_front(&s, &one).unwrap(), pareto_front(&s, &four).unwrap());
        assert_eq!(solve_p4(&s, 1.0, &one).unwrap(), solve_p4(&s, 1.0, &four).unwrap());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_cost(3.0, 2.0), 1.5);
        assert_eq!(normalize_cost(0.0, 0.0), 1.0);
        assert_eq!(normalize_cost(1.0, 0.0), f64::INFINITY);
    }
}
