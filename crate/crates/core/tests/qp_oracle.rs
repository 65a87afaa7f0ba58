//! Interior-point results against exact solutions of small programs.

use energyshed::qp::{check_feasibility, kkt_residuals, solve_qp, Feasibility, QuadProgram, SolverConfig, Status};
use proptest::prelude::*;

/// Separable strictly convex program with box bounds and one linear row.
#[derive(Debug, Clone)]
struct OneRow {
    q: Vec<f64>,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    g: Vec<f64>,
    rhs: f64,
    equality: bool,
}

impl OneRow {
    fn program(&self) -> QuadProgram {
        let n = self.q.len();
        let mut p = QuadProgram::new(n);
        p.q_diag = self.q.clone();
        p.c_lin = self.c.clone();
        for j in 0..n {
            p.set_bounds(j, self.lo[j], self.hi[j]);
        }
        let row: Vec<(usize, f64)> = self.g.iter().copied().enumerate().collect();
        if self.equality {
            p.add_eq(&row, self.rhs);
        } else {
            p.add_ineq(&row, self.rhs);
        }
        p
    }

    fn minimizer(&self, lambda: f64) -> Vec<f64> {
        (0..self.q.len())
            .map(|j| ((-self.c[j] - lambda * self.g[j]) / (2.0 * self.q[j])).clamp(self.lo[j], self.hi[j]))
            .collect()
    }

    fn row(&self, x: &[f64]) -> f64 {
        self.g.iter().zip(x).map(|(g, x)| g * x).sum()
    }

    /// Exact optimum from the one-dimensional dual: the row value of the
    /// Lagrangian minimizer is nonincreasing in the multiplier.
    fn oracle(&self) -> Option<Vec<f64>> {
        let row_min: f64 = (0..self.q.len()).map(|j| (self.g[j] * self.lo[j]).min(self.g[j] * self.hi[j])).sum();
        let row_max: f64 = (0..self.q.len()).map(|j| (self.g[j] * self.lo[j]).max(self.g[j] * self.hi[j])).sum();
        if row_min > self.rhs || (self.equality && row_max < self.rhs) {
            return None;
        }
        let free = self.minimizer(0.0);
        if !self.equality && self.row(&free) <= self.rhs {
            return Some(free);
        }
        let (mut a, mut b) = if self.equality { (-1e6, 1e6) } else { (0.0, 1e6) };
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.row(&self.minimizer(m)) > self.rhs {
                a = m;
            } else {
                b = m;
            }
        }
        Some(self.minimizer(0.5 * (a + b)))
    }
}

fn one_row() -> impl Strategy<Value = OneRow> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.1f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec((-3.0f64..0.0, 0.0f64..3.0), n),
            prop::collection::vec(-2.0f64..2.0, n),
            -4.0f64..4.0,
            any::<bool>(),
        )
            .prop_map(|(q, c, bounds, g, rhs, equality)| OneRow {
                q,
                c,
                lo: bounds.iter().map(|b| b.0).collect(),
                hi: bounds.iter().map(|b| b.1).collect(),
                g,
                rhs,
                equality,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_dual_oracle(inst in one_row()) {
        let p = inst.program();
        let cfg = SolverConfig::default();
        match inst.oracle() {
            Some(x) => {
                let sol = solve_qp(&p, &cfg).unwrap();
                prop_assert_eq!(sol.status, Status::Optimal);
                let want = p.objective(&x);
                prop_assert!((sol.objective - want).abs() <= 1e-6 * (1.0 + want.abs()),
                    "objective {} vs oracle {}", sol.objective, want);
                prop_assert!(kkt_residuals(&p, &sol).unwrap().max() <= 1e-6);
            }
            None => {
                prop_assert_eq!(check_feasibility(&p, &cfg).unwrap(), Feasibility::Infeasible);
            }
        }
    }
}

/// Two variables, two rows: compare with a fine grid.
#[test]
fn two_rows_against_grid() {
    let mut p = QuadProgram::new(2);
    p.q_diag = vec![1.0, 2.0];
    p.c_lin = vec![-4.0, -6.0];
    p.set_bounds(0, 0.0, 3.0);
    p.set_bounds(1, 0.0, 3.0);
    p.add_ineq(&[(0, 1.0), (1, 1.0)], 2.5);
    p.add_ineq(&[(0, -1.0), (1, 2.0)], 1.0);
    let sol = solve_qp(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);

    let n = 1500;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let x = [3.0 * i as f64 / n as f64, 3.0 * j as f64 / n as f64];
            if x[0] + x[1] <= 2.5 && -x[0] + 2.0 * x[1] <= 1.0 {
                best = best.min(p.objective(&x));
            }
        }
    }
    assert!(sol.objective <= best + 1e-9);
    assert!(best - sol.objective < 1e-4, "{} vs grid {}", sol.objective, best);
}

#[test]
fn empty_box_intersection_is_infeasible() {
    let mut p = QuadProgram::new(2);
    p.q_diag = vec![1.0, 1.0];
    p.set_bounds(0, 0.0, 1.0);
    p.set_bounds(1, 0.0, 1.0);
    p.add_eq(&[(0, 1.0), (1, 1.0)], 3.0);
    assert_eq!(check_feasibility(&p, &SolverConfig::default()).unwrap(), Feasibility::Infeasible);
    assert_eq!(solve_qp(&p, &SolverConfig::default()).unwrap().status, Status::Infeasible);
}
