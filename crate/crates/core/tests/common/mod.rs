#![allow(dead_code)]

use std::path::PathBuf;

use energyshed::netmodel::*;
use energyshed::problems::{build_p1, extract_report, OperationReport};
use energyshed::qp::{kkt_residuals, solve_qp, Solution, SolverConfig, Status};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn bundled(level: &str) -> Scenario {
    load_scenario(data_path(&format!("scenario_{level}.json")))
        .expect("bundled scenario loads")
        .scenario
}

fn bus(id: u32) -> Bus {
    Bus { id, has_load: false, nominal_load_mw: 0.0 }
}

/// A community at bus 1 tied by an unlimited line to bus 2, which stands in
/// for the rest of the grid and can absorb or supply up to `grid_cap`.
pub fn community_with_grid(
    gen: &[f64],
    load: &[f64],
    cap: &[f64],
    export_limit: Option<&[f64]>,
    grid_cap: f64,
) -> Scenario {
    let nt = load.len();
    let cap_minus: Vec<f64> = match export_limit {
        Some(p) => cap.iter().zip(p).map(|(c, p)| c + p.abs()).collect(),
        None => cap.to_vec(),
    };
    let mut s = Scenario {
        name: "community".into(),
        network: Network {
            buses: vec![bus(1), bus(2)],
            branches: vec![Branch { from: 1, to: 2, reactance: 0.1, flow_limit: f64::INFINITY }],
            base_mva: 100.0,
            reference_bus: 1,
        },
        time_grid: TimeGrid { steps: nt, step_hours: 1.0 },
        profiles: Profiles {
            gen: BusTimeMatrix::from_rows(vec![gen.to_vec(), vec![0.0; nt]]),
            load: BusTimeMatrix::from_rows(vec![load.to_vec(), vec![0.0; nt]]),
        },
        budgets: FlexBudget {
            cap_plus: BusTimeMatrix::from_rows(vec![cap.to_vec(), vec![grid_cap; nt]]),
            cap_minus: BusTimeMatrix::from_rows(vec![cap_minus, vec![grid_cap; nt]]),
            export_limit: export_limit.map(|p| ExportLimits {
                upper: BusTimeMatrix::from_rows(vec![p.to_vec(), vec![f64::INFINITY; nt]]),
                lower: BusTimeMatrix::filled(2, nt, f64::NEG_INFINITY),
            }),
        },
        weights: CostWeights { alpha: vec![1.0, 0.1], beta: vec![1.0, 0.1] },
        partition: Partition::from_bus_sets(vec![vec![1]]),
        flex_only_at_load_buses: false,
    };
    s.refresh_load_flags();
    s
}

/// Data for a three-bus path 1-2-3 with added generation at buses 1 and 3
/// only, sheds {1} and {2, 3}.
#[derive(Debug, Clone)]
pub struct PathInstance {
    pub gen: [Vec<f64>; 3],
    pub load: [Vec<f64>; 3],
    pub cap1: Vec<f64>,
    pub cap3: Vec<f64>,
    pub limit12: f64,
    pub limit23: f64,
    pub alpha1: f64,
    pub alpha3: f64,
    pub tau: f64,
}

impl PathInstance {
    pub fn scenario(&self) -> Scenario {
        let nt = self.cap1.len();
        let mut s = Scenario {
            name: "path3".into(),
            network: Network {
                buses: vec![bus(1), bus(2), bus(3)],
                branches: vec![
                    Branch { from: 1, to: 2, reactance: 0.1, flow_limit: self.limit12 },
                    Branch { from: 2, to: 3, reactance: 0.2, flow_limit: self.limit23 },
                ],
                base_mva: 100.0,
                reference_bus: 1,
            },
            time_grid: TimeGrid { steps: nt, step_hours: 1.0 },
            profiles: Profiles {
                gen: BusTimeMatrix::from_rows(self.gen.to_vec()),
                load: BusTimeMatrix::from_rows(self.load.to_vec()),
            },
            budgets: FlexBudget {
                cap_plus: BusTimeMatrix::from_rows(vec![self.cap1.clone(), vec![0.0; nt], self.cap3.clone()]),
                cap_minus: BusTimeMatrix::zeros(3, nt),
                export_limit: None,
            },
            weights: CostWeights {
                alpha: vec![self.alpha1, 0.5, self.alpha3],
                beta: vec![1.0; 3],
            },
            partition: Partition::from_bus_sets(vec![vec![1], vec![2, 3]]),
            flex_only_at_load_buses: true,
        };
        s.refresh_load_flags();
        s
    }

    /// Exact feasibility for peak capacities `c1`, `c3`. With one free
    /// dispatch variable per step (bus 1's added generation `x`; bus 3 covers
    /// the rest of the deficit) every constraint is an interval on `x` or on
    /// its sum over steps.
    pub fn feasible_with_caps(&self, c1: f64, c3: f64) -> bool {
        let nt = self.cap1.len();
        let (g, l) = (&self.gen, &self.load);
        let (mut sum_lo, mut sum_hi) = (0.0, 0.0);
        let mut total_deficit = 0.0;
        for t in 0..nt {
            let d: f64 = (0..3).map(|i| l[i][t] - g[i][t]).sum();
            total_deficit += d;
            let lo = [
                0.0,
                d - self.cap3[t].min(c3),
                -self.limit12 - g[0][t] + l[0][t],
                -self.limit23 - l[2][t] + g[2][t] + d,
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
            let hi = [
                self.cap1[t].min(c1),
                d,
                self.limit12 - g[0][t] + l[0][t],
                self.limit23 - l[2][t] + g[2][t] + d,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            if lo > hi + 1e-12 {
                return false;
            }
            sum_lo += lo;
            sum_hi += hi;
        }
        let s = |v: &Vec<f64>| v.iter().sum::<f64>();
        let a = self.tau * s(&l[0]) - s(&g[0]);
        let b = total_deficit - self.tau * (s(&l[1]) + s(&l[2])) + s(&g[1]) + s(&g[2]);
        sum_lo.max(a) <= sum_hi.min(b) + 1e-12
    }

    /// Minimum cost over peak capacities on a grid of step `h`, or `None`
    /// when no grid point is feasible.
    pub fn grid_minimum(&self, h: f64) -> Option<f64> {
        let top = |v: &Vec<f64>| v.iter().copied().fold(0.0, f64::max);
        let n1 = (top(&self.cap1) / h + 1e-9).round() as usize;
        let n3 = (top(&self.cap3) / h + 1e-9).round() as usize;
        let mut best: Option<f64> = None;
        for i in 0..=n1 {
            let c1 = i as f64 * h;
            for j in 0..=n3 {
                let c3 = j as f64 * h;
                let cost = self.alpha1 * c1 * c1 + self.alpha3 * c3 * c3;
                if best.is_some_and(|b| cost >= b) {
                    break;
                }
                if self.feasible_with_caps(c1, c3) {
                    best = Some(cost);
                    // larger c3 only costs more for this c1
                    break;
                }
            }
        }
        best
    }
}

/// Solve the least-cost program and return the report with its scaled KKT
/// residual.
pub fn solve_checked(s: &Scenario, x_min: &[f64]) -> Option<(OperationReport, Solution, f64)> {
    let (p, layout) = build_p1(s, x_min).expect("program builds");
    let sol = solve_qp(&p, &SolverConfig::default()).expect("solver runs");
    if sol.status != Status::Optimal {
        return None;
    }
    let kkt = kkt_residuals(&p, &sol).expect("residuals").max();
    let report = extract_report(s, &layout, &sol).expect("report decodes");
    Some((report, sol, kkt))
}
