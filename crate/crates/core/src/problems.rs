//! Compile scenarios into quadratic programs and decode their solutions.
//!
//! The network program has, per bus `i` and step `t`, an angle `theta`,
//! added generation `s_plus` and added demand `s_minus`; per branch and step
//! a flow; per bus two capacity variables `c_plus >= s_plus[.,t]` and
//! `c_minus >= s_minus[.,t]` whose squares are priced by the cost weights.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{validate_scenario, NetError, Scenario, ValidationReport};
use crate::qp::{solve_qp, QpError, QuadProgram, Solution, SolverConfig, Status};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid scenario:\n{0}")]
    InvalidScenario(ValidationReport),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("{got} ratio requirements for {sheds} energysheds")]
    RequirementCount { got: usize, sheds: usize },
    #[error("ratio requirement {value} for energyshed {shed} must be finite and nonnegative")]
    InvalidRequirement { shed: usize, value: f64 },
    #[error("zeta must be finite and positive, got {0}")]
    InvalidZeta(f64),
    #[error("solution status is {0:?}, not optimal")]
    NotOptimal(Status),
    #[error("energyshed {shed}: recomputed ratio {ratio} misses requirement {required}")]
    RatioMismatch { shed: usize, ratio: f64, required: f64 },
}

/// Index map from modelling symbols to program columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub buses: usize,
    pub branches: usize,
    pub steps: usize,
    /// Ratio requirement per energyshed used when the program was built.
    pub x_min: Vec<f64>,
    /// Inequality row of each shed's ratio constraint, when emitted.
    pub ratio_rows: Vec<Option<usize>>,
}

impl VariableLayout {
    fn new(buses: usize, branches: usize, steps: usize, x_min: Vec<f64>) -> Self {
        Self {
            buses,
            branches,
            steps,
            ratio_rows: vec![None; x_min.len()],
            x_min,
        }
    }

    pub fn theta(&self, bus: usize, t: usize) -> usize {
        bus * self.steps + t
    }

    pub fn flow(&self, branch: usize, t: usize) -> usize {
        self.buses * self.steps + branch * self.steps + t
    }

    pub fn s_plus(&self, bus: usize, t: usize) -> usize {
        (self.buses + self.branches) * self.steps + bus * self.steps + t
    }

    pub fn s_minus(&self, bus: usize, t: usize) -> usize {
        (2 * self.buses + self.branches) * self.steps + bus * self.steps + t
    }

    pub fn c_plus(&self, bus: usize) -> usize {
        (3 * self.buses + self.branches) * self.steps + bus
    }

    pub fn c_minus(&self, bus: usize) -> usize {
        (3 * self.buses + self.branches) * self.steps + self.buses + bus
    }

    pub fn n(&self) -> usize {
        (3 * self.buses + self.branches) * self.steps + 2 * self.buses
    }

    fn names(&self, s: &Scenario) -> Vec<String> {
        let mut names = vec![String::new(); self.n()];
        let net = &s.network;
        for (i, bus) in net.buses.iter().enumerate() {
            for t in 0..self.steps {
                names[self.theta(i, t)] = format!("theta[{},{}]", bus.id, t + 1);
                names[self.s_plus(i, t)] = format!("s_plus[{},{}]", bus.id, t + 1);
                names[self.s_minus(i, t)] = format!("s_minus[{},{}]", bus.id, t + 1);
            }
            names[self.c_plus(i)] = format!("c_plus[{}]", bus.id);
            names[self.c_minus(i)] = format!("c_minus[{}]", bus.id);
        }
        for (e, br) in net.branches.iter().enumerate() {
            for t in 0..self.steps {
                names[self.flow(e, t)] = format!("flow[{}-{},{}]", br.from, br.to, t + 1);
            }
        }
        names
    }
}

fn check_scenario(s: &Scenario) -> Result<(), ProblemError> {
    let report = validate_scenario(s);
    if report.is_empty() {
        Ok(())
    } else {
        Err(ProblemError::InvalidScenario(report))
    }
}

/// Cost-minimizing operation subject to a ratio requirement per energyshed.
///
/// Builds DC power flow with flow limits, flexibility boxes, optional export
/// bounds on net flexibility, the linearized ratio constraints and the
/// epigraph form of the peak-capacity cost. Each ratio row is divided by the
/// shed's total demand energy.
pub fn build_p1(s: &Scenario, x_min: &[f64]) -> Result<(QuadProgram, VariableLayout), ProblemError> {
    check_scenario(s)?;
    let sheds = s.shed_bus_positions()?;
    if x_min.len() != sheds.len() {
        return Err(ProblemError::RequirementCount {
            got: x_min.len(),
            sheds: sheds.len(),
        });
    }
    for (shed, &value) in x_min.iter().enumerate() {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(ProblemError::InvalidRequirement { shed, value });
        }
    }

    let net = &s.network;
    let positions = net.positions();
    let (nb, ne, nt) = (net.bus_count(), net.branches.len(), s.time_grid.steps);
    let mut layout = VariableLayout::new(nb, ne, nt, x_min.to_vec());
    let mut p = QuadProgram::new(layout.n());
    p.names = layout.names(s);
    let gen = &s.profiles.gen;
    let load = &s.profiles.load;
    let caps = &s.budgets;

    for (e, br) in net.branches.iter().enumerate() {
        for t in 0..nt {
            p.set_bounds(layout.flow(e, t), -br.flow_limit, br.flow_limit);
        }
    }
    for i in 0..nb {
        for t in 0..nt {
            p.set_bounds(layout.s_plus(i, t), 0.0, caps.cap_plus.get(i, t));
            p.set_bounds(layout.s_minus(i, t), 0.0, caps.cap_minus.get(i, t));
        }
        p.set_bounds(layout.c_plus(i), 0.0, caps.cap_plus.row_max(i).max(0.0));
        p.set_bounds(layout.c_minus(i), 0.0, caps.cap_minus.row_max(i).max(0.0));
        p.q_diag[layout.c_plus(i)] = s.weights.alpha[i];
        p.q_diag[layout.c_minus(i)] = s.weights.beta[i];
    }

    // power balance: G - L + S+ - S- = sum of flows leaving minus entering
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for (e, br) in net.branches.iter().enumerate() {
        incident[positions[&br.from]].push((e, -1.0));
        incident[positions[&br.to]].push((e, 1.0));
    }
    for i in 0..nb {
        for t in 0..nt {
            let mut row = vec![(layout.s_plus(i, t), 1.0), (layout.s_minus(i, t), -1.0)];
            row.extend(incident[i].iter().map(|&(e, sign)| (layout.flow(e, t), sign)));
            p.add_eq(&row, load.get(i, t) - gen.get(i, t));
        }
    }
    // flow law: x P = theta_from - theta_to
    for (e, br) in net.branches.iter().enumerate() {
        let (a, b) = (positions[&br.from], positions[&br.to]);
        for t in 0..nt {
            p.add_eq(
                &[
                    (layout.flow(e, t), br.reactance),
                    (layout.theta(a, t), -1.0),
                    (layout.theta(b, t), 1.0),
                ],
                0.0,
            );
        }
    }
    let reference = positions[&net.reference_bus];
    for t in 0..nt {
        p.add_eq(&[(layout.theta(reference, t), 1.0)], 0.0);
    }

    if let Some(limits) = &caps.export_limit {
        for i in 0..nb {
            for t in 0..nt {
                let row = [(layout.s_plus(i, t), 1.0), (layout.s_minus(i, t), -1.0)];
                let (lo, hi) = (limits.lower.get(i, t), limits.upper.get(i, t));
                if hi.is_finite() {
                    p.add_ineq(&row, hi);
                }
                if lo.is_finite() {
                    p.add_ineq(&[(row[0].0, -1.0), (row[1].0, 1.0)], -lo);
                }
            }
        }
    }

    for (k, buses) in sheds.iter().enumerate() {
        let tau = x_min[k];
        if tau == 0.0 {
            continue;
        }
        let demand: f64 = buses.iter().map(|&i| load.row_sum(i)).sum();
        let base_gen: f64 = buses.iter().map(|&i| gen.row_sum(i)).sum();
        let mut row = Vec::with_capacity(2 * buses.len() * nt);
        for &i in buses {
            for t in 0..nt {
                row.push((layout.s_plus(i, t), -1.0 / demand));
                row.push((layout.s_minus(i, t), tau / demand));
            }
        }
        layout.ratio_rows[k] = Some(p.add_ineq(&row, (base_gen - tau * demand) / demand));
    }

    for i in 0..nb {
        for t in 0..nt {
            p.add_ineq(&[(layout.s_plus(i, t), 1.0), (layout.c_plus(i), -1.0)], 0.0);
            p.add_ineq(&[(layout.s_minus(i, t), 1.0), (layout.c_minus(i), -1.0)], 0.0);
        }
    }
    Ok((p, layout))
}

/// Feasibility form: the constraints of [`build_p1`] with every requirement
/// equal to `tau` and a zero objective.
pub fn build_p3(s: &Scenario, tau: f64) -> Result<(QuadProgram, VariableLayout), ProblemError> {
    let (mut p, layout) = build_p1(s, &vec![tau; s.partition.len()])?;
    p.q_diag.iter_mut().for_each(|q| *q = 0.0);
    Ok((p, layout))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShedRatio {
    pub shed: usize,
    pub ratio: f64,
    pub baseline_ratio: f64,
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusCapacity {
    pub bus: u32,
    pub shed: Option<usize>,
    /// Ratio of the bus's energyshed, if it belongs to one.
    pub ratio: Option<f64>,
    /// Peak added generation over the horizon, per-unit.
    pub cap_plus: f64,
    /// Peak added demand over the horizon, per-unit.
    pub cap_minus: f64,
    pub cap_plus_mw: f64,
    pub cap_minus_mw: f64,
    /// Added generation and demand energy over the horizon, MWh.
    pub energy_plus_mwh: f64,
    pub energy_minus_mwh: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchLoading {
    pub from: u32,
    pub to: u32,
    pub peak_flow: f64,
    pub peak_flow_mw: f64,
    /// Peak flow over the limit; zero for unlimited branches.
    pub loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationReport {
    pub feasible: bool,
    pub cost: f64,
    pub sheds: Vec<ShedRatio>,
    pub buses: Vec<BusCapacity>,
    pub branches: Vec<BranchLoading>,
    /// Largest per-step mismatch of total injections, per-unit.
    pub balance_residual: f64,
    pub base_mva: f64,
    pub step_hours: f64,
}

impl OperationReport {
    pub fn min_ratio(&self) -> f64 {
        self.sheds.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    /// Per-bus table, rows ordered by increasing `alpha` (ties by bus id).
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<&BusCapacity> = self.buses.iter().collect();
        rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.bus.cmp(&b.bus)));
        let mut out =
            String::from("bus,ratio,cap_plus,cap_minus,cap_plus_mw,cap_minus_mw,shed,alpha\n");
        for r in rows {
            let ratio = r.ratio.map(|v| format!("{v:?}")).unwrap_or_default();
            let shed = r.shed.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{ratio},{:?},{:?},{:?},{:?},{shed},{:?}",
                r.bus, r.cap_plus, r.cap_minus, r.cap_plus_mw, r.cap_minus_mw, r.alpha
            );
        }
        out
    }
}

/// Energyshed ratio with flexibility, for each shed.
pub fn shed_ratios(s: &Scenario, s_plus: &[Vec<f64>], s_minus: &[Vec<f64>]) -> Result<Vec<f64>, NetError> {
    let gen = &s.profiles.gen;
    let load = &s.profiles.load;
    s.shed_bus_positions()?
        .iter()
        .map(|buses| {
            let num: f64 = buses.iter().map(|&i| gen.row_sum(i) + s_plus[i].iter().sum::<f64>()).sum();
            let den: f64 = buses.iter().map(|&i| load.row_sum(i) + s_minus[i].iter().sum::<f64>()).sum();
            Ok(num / den)
        })
        .collect()
}

/// Decode an optimal solution of [`build_p1`] into a report.
///
/// Ratios are recomputed from the decoded flexibility and checked against
/// the requirements the program was built with.
pub fn extract_report(s: &Scenario, layout: &VariableLayout, sol: &Solution) -> Result<OperationReport, ProblemError> {
    if sol.status != Status::Optimal {
        return Err(ProblemError::NotOptimal(sol.status));
    }
    let net = &s.network;
    let (nb, nt) = (layout.buses, layout.steps);
    let s_plus: Vec<Vec<f64>> = (0..nb)
        .map(|i| (0..nt).map(|t| sol.x[layout.s_plus(i, t)]).collect())
        .collect();
    let s_minus: Vec<Vec<f64>> = (0..nb)
        .map(|i| (0..nt).map(|t| sol.x[layout.s_minus(i, t)]).collect())
        .collect();
    let ratios = shed_ratios(s, &s_plus, &s_minus)?;

    let mut sheds = Vec::with_capacity(ratios.len());
    let mut owner: Vec<Option<usize>> = vec![None; nb];
    for (k, buses) in s.shed_bus_positions()?.iter().enumerate() {
        let ratio = ratios[k];
        let required = layout.x_min[k];
        if ratio < required - 1e-6 {
            return Err(ProblemError::RatioMismatch { shed: k, ratio, required });
        }
        buses.iter().for_each(|&i| owner[i] = Some(k));
        sheds.push(ShedRatio {
            shed: s.partition.sheds[k].id,
            ratio,
            baseline_ratio: crate::netmodel::baseline_ratio(s, s.partition.sheds[k].id)?,
            required,
        });
    }

    let base = net.base_mva;
    let hours = s.time_grid.step_hours;
    let peak = |v: &[f64]| v.iter().copied().fold(0.0f64, f64::max);
    let mut cost = 0.0;
    let buses = (0..nb)
        .map(|i| {
            let (cp, cm) = (peak(&s_plus[i]), peak(&s_minus[i]));
            let (alpha, beta) = (s.weights.alpha[i], s.weights.beta[i]);
            cost += alpha * cp * cp + beta * cm * cm;
            BusCapacity {
                bus: net.buses[i].id,
                shed: owner[i].map(|k| s.partition.sheds[k].id),
                ratio: owner[i].map(|k| ratios[k]),
                cap_plus: cp,
                cap_minus: cm,
                cap_plus_mw: cp * base,
                cap_minus_mw: cm * base,
                energy_plus_mwh: s_plus[i].iter().sum::<f64>() * base * hours,
                energy_minus_mwh: s_minus[i].iter().sum::<f64>() * base * hours,
                alpha,
                beta,
            }
        })
        .collect();

    let branches = net
        .branches
        .iter()
        .enumerate()
        .map(|(e, br)| {
            let peak_flow = (0..nt).map(|t| sol.x[layout.flow(e, t)].abs()).fold(0.0, f64::max);
            BranchLoading {
                from: br.from,
                to: br.to,
                peak_flow,
                peak_flow_mw: peak_flow * base,
                loading: if br.flow_limit.is_finite() && br.flow_limit > 0.0 {
                    peak_flow / br.flow_limit
                } else {
                    0.0
                },
            }
        })
        .collect();

    let balance_residual = (0..nt)
        .map(|t| {
            (0..nb)
                .map(|i| {
                    s.profiles.gen.get(i, t) - s.profiles.load.get(i, t) + s_plus[i][t] - s_minus[i][t]
                })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);

    Ok(OperationReport {
        feasible: true,
        cost,
        sheds,
        buses,
        branches,
        balance_residual,
        base_mva: base,
        step_hours: hours,
    })
}

/// Solve [`build_p1`] and decode. `Ok(None)` when the requirements are
/// infeasible.
pub fn solve_p1(
    s: &Scenario,
    x_min: &[f64],
    cfg: &SolverConfig,
) -> Result<Option<(OperationReport, Solution)>, ProblemError> {
    let (p, layout) = build_p1(s, x_min)?;
    let sol = solve_qp(&p, cfg)?;
    match sol.status {
        Status::Infeasible => Ok(None),
        Status::MaxIter => Err(ProblemError::NotOptimal(Status::MaxIter)),
        Status::Optimal => Ok(Some((extract_report(s, &layout, &sol)?, sol))),
    }
}

/// One point of the parametric sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTau {
    pub tau: f64,
    /// `tau - cost / zeta`, or negative infinity when infeasible.
    #[serde(with = "crate::nonfinite")]
    pub f_tau: f64,
    /// Capacity cost of the optimal operation; infinite when infeasible.
    #[serde(with = "crate::nonfinite")]
    pub cost: f64,
    pub report: Option<OperationReport>,
}

/// Objective of the parametric program at requirement `tau` for every shed.
///
/// ```no_run
/// # use energyshed::{netmodel::load_scenario, problems::evaluate_f_tau, qp::SolverConfig};
/// let s = load_scenario("crates/core/data/scenario_medium.json").unwrap().scenario;
/// let point = evaluate_f_tau(&s, 0.5, 10.0, &SolverConfig::default()).unwrap();
/// println!("f(0.5) = {}", point.f_tau);
/// ```
pub fn evaluate_f_tau(s: &Scenario, tau: f64, zeta: f64, cfg: &SolverConfig) -> Result<FTau, ProblemError> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(ProblemError::InvalidZeta(zeta));
    }
    Ok(match solve_p1(s, &vec![tau; s.partition.len()], cfg)? {
        None => FTau {
            tau,
            f_tau: f64::NEG_INFINITY,
            cost: f64::INFINITY,
            report: None,
        },
        Some((report, sol)) => FTau {
            tau,
            f_tau: tau - sol.objective / zeta,
            cost: sol.objective,
            report: Some(report),
        },
    })
}
