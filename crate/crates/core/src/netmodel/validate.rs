//! Scenario-wide invariant checks. Violations are collected, not raised.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{induced_subgraph_connected, BusTimeMatrix, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DuplicateBus,
    MissingReferenceBus,
    NonpositiveBaseMva,
    UnknownBranchBus,
    SelfLoop,
    NonpositiveReactance,
    NegativeFlowLimit,
    DisconnectedNetwork,
    InvalidTimeGrid,
    ProfileDimension,
    NegativeProfile,
    BudgetDimension,
    NegativeBudget,
    FlexAtNonLoadBus,
    ExportLimitDimension,
    InvertedExportLimits,
    WeightDimension,
    NegativeWeight,
    EmptyShed,
    UnknownShedBus,
    ShedsNotDisjoint,
    UncoveredLoadBus,
    DisconnectedShed,
    ZeroDemandShed,
}

impl ViolationKind {
    pub fn describe(self) -> &'static str {
        use ViolationKind::*;
        match self {
            DuplicateBus => "duplicate bus id",
            MissingReferenceBus => "reference bus missing",
            NonpositiveBaseMva => "nonpositive base MVA",
            UnknownBranchBus => "branch references unknown bus",
            SelfLoop => "branch from and to the same bus",
            NonpositiveReactance => "nonpositive reactance",
            NegativeFlowLimit => "negative flow limit",
            DisconnectedNetwork => "network not connected",
            InvalidTimeGrid => "invalid time grid",
            ProfileDimension => "profile dimensions mismatch",
            NegativeProfile => "negative profile value",
            BudgetDimension => "budget dimensions mismatch",
            NegativeBudget => "negative flexibility cap",
            FlexAtNonLoadBus => "flexibility at bus without load",
            ExportLimitDimension => "export limit dimensions mismatch",
            InvertedExportLimits => "export lower limit above upper limit",
            WeightDimension => "cost weight length mismatch",
            NegativeWeight => "negative cost weight",
            EmptyShed => "empty energyshed",
            UnknownShedBus => "energyshed references unknown bus",
            ShedsNotDisjoint => "sheds not disjoint",
            UncoveredLoadBus => "load bus not covered by any energyshed",
            DisconnectedShed => "energyshed not connected",
            ZeroDemandShed => "zero-demand energyshed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Where the problem is, e.g. `bus 4`, `branch 3`, `shed 2, t=5`.
    pub location: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.kind.describe())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// Distinct violation kinds, sorted.
    pub fn kinds(&self) -> Vec<ViolationKind> {
        let mut kinds: Vec<_> = self.violations.iter().map(|v| v.kind).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    fn push(&mut self, kind: ViolationKind, location: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            location: location.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let net = &s.network;
    let n = net.bus_count();
    let steps = s.time_grid.steps;

    let mut ids = HashSet::new();
    for bus in &net.buses {
        if !ids.insert(bus.id) {
            report.push(ViolationKind::DuplicateBus, format!("bus {}", bus.id));
        }
    }
    if !ids.contains(&net.reference_bus) {
        report.push(ViolationKind::MissingReferenceBus, format!("bus {}", net.reference_bus));
    }
    if !(net.base_mva > 0.0 && net.base_mva.is_finite()) {
        report.push(ViolationKind::NonpositiveBaseMva, "network");
    }
    let mut topology_ok = n > 0;
    for (k, br) in net.branches.iter().enumerate() {
        let loc = format!("branch {} ({}-{})", k + 1, br.from, br.to);
        for end in [br.from, br.to] {
            if !ids.contains(&end) {
                report.push(ViolationKind::UnknownBranchBus, format!("{loc}, bus {end}"));
                topology_ok = false;
            }
        }
        if br.from == br.to {
            report.push(ViolationKind::SelfLoop, loc.clone());
        }
        if !(br.reactance > 0.0 && br.reactance.is_finite()) {
            report.push(ViolationKind::NonpositiveReactance, loc.clone());
        }
        if br.flow_limit.is_nan() || br.flow_limit < 0.0 {
            report.push(ViolationKind::NegativeFlowLimit, loc);
        }
    }
    if topology_ok && !net.is_connected() {
        report.push(ViolationKind::DisconnectedNetwork, "network");
    }

    if steps == 0 || !(s.time_grid.step_hours > 0.0 && s.time_grid.step_hours.is_finite()) {
        report.push(ViolationKind::InvalidTimeGrid, "time grid");
    }

    let dims_ok = |m: &BusTimeMatrix| m.buses() == n && m.steps() == steps;
    let profiles_ok = dims_ok(&s.profiles.gen) && dims_ok(&s.profiles.load);
    for (name, m) in [("gen", &s.profiles.gen), ("load", &s.profiles.load)] {
        if !dims_ok(m) {
            report.push(ViolationKind::ProfileDimension, format!("{name} profile"));
        } else {
            negative_entries(&mut report, s, m, ViolationKind::NegativeProfile, name);
        }
    }

    let has_load: Vec<bool> = if profiles_ok {
        (0..n).map(|b| s.profiles.load.row_sum(b) > 0.0).collect()
    } else {
        net.buses.iter().map(|b| b.has_load).collect()
    };

    for (name, m) in [("cap_plus", &s.budgets.cap_plus), ("cap_minus", &s.budgets.cap_minus)] {
        if !dims_ok(m) {
            report.push(ViolationKind::BudgetDimension, name);
            continue;
        }
        negative_entries(&mut report, s, m, ViolationKind::NegativeBudget, name);
        if s.flex_only_at_load_buses {
            for b in 0..n {
                if !has_load[b] && m.row(b).iter().any(|&v| v != 0.0) {
                    report.push(
                        ViolationKind::FlexAtNonLoadBus,
                        format!("{name}, bus {}", net.buses[b].id),
                    );
                }
            }
        }
    }
    if let Some(limits) = &s.budgets.export_limit {
        if !dims_ok(&limits.upper) || !dims_ok(&limits.lower) {
            report.push(ViolationKind::ExportLimitDimension, "export limits");
        } else {
            for b in 0..n {
                let inverted = (0..steps).any(|t| {
                    let (lo, hi) = (limits.lower.get(b, t), limits.upper.get(b, t));
                    lo.is_nan() || hi.is_nan() || lo > hi
                });
                if inverted {
                    report.push(
                        ViolationKind::InvertedExportLimits,
                        format!("bus {}", net.buses[b].id),
                    );
                }
            }
        }
    }

    for (name, w) in [("alpha", &s.weights.alpha), ("beta", &s.weights.beta)] {
        if w.len() != n {
            report.push(ViolationKind::WeightDimension, name);
            continue;
        }
        for (b, &v) in w.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                report.push(ViolationKind::NegativeWeight, format!("{name}, bus {}", net.buses[b].id));
            }
        }
    }

    validate_partition(&mut report, s, &ids, &has_load, profiles_ok);
    report
}

fn negative_entries(
    report: &mut ValidationReport,
    s: &Scenario,
    m: &BusTimeMatrix,
    kind: ViolationKind,
    name: &str,
) {
    for b in 0..m.buses() {
        if let Some(t) = m.row(b).iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
            report.push(kind, format!("{name}, bus {}, t={}", s.network.buses[b].id, t + 1));
        }
    }
}

fn validate_partition(
    report: &mut ValidationReport,
    s: &Scenario,
    ids: &HashSet<u32>,
    has_load: &[bool],
    profiles_ok: bool,
) {
    let positions = s.network.positions();
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for shed in &s.partition.sheds {
        let loc = format!("shed {}", shed.id);
        if shed.buses.is_empty() {
            report.push(ViolationKind::EmptyShed, loc);
            continue;
        }
        let mut known = true;
        let mut local = HashSet::new();
        for &id in &shed.buses {
            if !ids.contains(&id) {
                report.push(ViolationKind::UnknownShedBus, format!("{loc}, bus {id}"));
                known = false;
                continue;
            }
            if !local.insert(id) {
                continue;
            }
            if let Some(&other) = owner.get(&id) {
                report.push(
                    ViolationKind::ShedsNotDisjoint,
                    format!("bus {id} in sheds {other} and {}", shed.id),
                );
            } else {
                owner.insert(id, shed.id);
            }
        }
        if !known {
            continue;
        }
        if !induced_subgraph_connected(&s.network, &shed.buses).unwrap_or(false) {
            report.push(ViolationKind::DisconnectedShed, loc.clone());
        }
        if profiles_ok {
            let demand: f64 = local.iter().map(|id| s.profiles.load.row_sum(positions[id])).sum();
            if demand <= 0.0 {
                report.push(ViolationKind::ZeroDemandShed, loc);
            }
        }
    }
    for (b, bus) in s.network.buses.iter().enumerate() {
        if has_load.get(b).copied().unwrap_or(false) && !owner.contains_key(&bus.id) {
            report.push(ViolationKind::UncoveredLoadBus, format!("bus {}", bus.id));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::fixtures::path_network;
    use crate::netmodel::*;
    use proptest::prelude::*;

    /// Three-bus path, loads at buses 1 and 3, bus 2 a pure transit node.
    fn valid() -> Scenario {
        let network = path_network(3);
        let load = BusTimeMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 0.0], vec![0.5, 1.0]]);
        let gen = BusTimeMatrix::from_rows(vec![vec![0.2, 0.0], vec![0.0, 0.0], vec![0.0, 0.3]]);
        let caps = BusTimeMatrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]]);
        let mut s = Scenario {
            name: "t".into(),
            network,
            time_grid: TimeGrid {
                steps: 2,
                step_hours: 1.0,
            },
            profiles: Profiles { gen, load },
            budgets: FlexBudget {
                cap_plus: caps.clone(),
                cap_minus: caps,
                export_limit: None,
            },
            weights: CostWeights {
                alpha: vec![1.0; 3],
                beta: vec![1.0; 3],
            },
            partition: Partition::from_bus_sets(vec![vec![1, 2], vec![3]]),
            flex_only_at_load_buses: true,
        };
        s.refresh_load_flags();
        s
    }

    #[test]
    fn valid_scenario_passes() {
        let r = validate_scenario(&valid());
        assert!(r.is_empty(), "{r}");
    }

    #[test]
    fn overlapping_sheds() {
        let mut s = valid();
        s.partition = Partition::from_bus_sets(vec![vec![1, 2], vec![2, 3]]);
        assert_eq!(validate_scenario(&s).kinds(), vec![ViolationKind::ShedsNotDisjoint]);
    }

    #[test]
    fn zero_demand_shed() {
        let mut s = valid();
        s.partition = Partition::from_bus_sets(vec![vec![1], vec![2], vec![3]]);
        assert_eq!(validate_scenario(&s).kinds(), vec![ViolationKind::ZeroDemandShed]);
    }

    /// One injected fault per case; each must produce exactly its own kind.
    fn inject(case: usize, s: &mut Scenario) -> ViolationKind {
        use ViolationKind::*;
        match case {
            0 => {
                s.network.buses[1].id = 1;
                s.network.branches.clear();
                s.network.branches.push(Branch {
                    from: 1,
                    to: 3,
                    reactance: 0.1,
                    flow_limit: 1.0,
                });
                s.partition = Partition::from_bus_sets(vec![vec![1], vec![3]]);
                DuplicateBus
            }
            1 => {
                s.network.reference_bus = 9;
                MissingReferenceBus
            }
            2 => {
                s.network.base_mva = 0.0;
                NonpositiveBaseMva
            }
            3 => {
                s.network.branches[0].reactance = -0.1;
                NonpositiveReactance
            }
            4 => {
                s.network.branches.push(Branch {
                    from: 2,
                    to: 2,
                    reactance: 0.1,
                    flow_limit: 1.0,
                });
                SelfLoop
            }
            5 => {
                s.network.branches[1].flow_limit = -1.0;
                NegativeFlowLimit
            }
            6 => {
                s.network.branches.pop();
                s.partition = Partition::from_bus_sets(vec![vec![1, 2], vec![3]]);
                DisconnectedNetwork
            }
            7 => {
                s.time_grid.step_hours = 0.0;
                InvalidTimeGrid
            }
            8 => {
                s.profiles.gen = BusTimeMatrix::zeros(3, 3);
                ProfileDimension
            }
            9 => {
                s.profiles.gen.set(0, 1, -0.5);
                NegativeProfile
            }
            10 => {
                s.budgets.cap_minus = BusTimeMatrix::zeros(2, 2);
                BudgetDimension
            }
            11 => {
                s.budgets.cap_plus.set(2, 0, -1.0);
                NegativeBudget
            }
            12 => {
                s.budgets.cap_plus.set(1, 0, 0.5);
                FlexAtNonLoadBus
            }
            13 => {
                s.budgets.export_limit = Some(ExportLimits {
                    upper: BusTimeMatrix::zeros(3, 1),
                    lower: BusTimeMatrix::zeros(3, 2),
                });
                ExportLimitDimension
            }
            14 => {
                s.budgets.export_limit = Some(ExportLimits {
                    upper: BusTimeMatrix::filled(3, 2, -1.0),
                    lower: BusTimeMatrix::filled(3, 2, 0.0),
                });
                InvertedExportLimits
            }
            15 => {
                s.weights.beta.push(1.0);
                WeightDimension
            }
            16 => {
                s.weights.alpha[0] = -1.0;
                NegativeWeight
            }
            17 => {
                s.partition.sheds.push(Shed { id: 2, buses: vec![] });
                EmptyShed
            }
            18 => {
                s.partition.sheds[0].buses.push(7);
                UnknownShedBus
            }
            19 => {
                s.partition = Partition::from_bus_sets(vec![vec![1, 2]]);
                UncoveredLoadBus
            }
            20 => {
                s.partition = Partition::from_bus_sets(vec![vec![1, 3], vec![2]]);
                s.profiles.load.set(1, 0, 0.1);
                s.budgets.cap_plus.set(1, 0, 0.0);
                DisconnectedShed
            }
            _ => {
                s.partition = Partition::from_bus_sets(vec![vec![1], vec![2], vec![3]]);
                ZeroDemandShed
            }
        }
    }

    proptest! {
        #[test]
        fn one_fault_one_kind(case in 0usize..22) {
            let mut s = valid();
            let expected = inject(case, &mut s);
            let r = validate_scenario(&s);
            prop_assert_eq!(r.kinds(), vec![expected], "{}", r);
        }
    }
}
