//! Network, time-series, partition and budget data shared by every solver.
//!
//! All quantities are per-unit on the network's MVA base unless a name says
//! otherwise. Energies are per-unit power multiplied by the step length in
//! hours.

mod config;
mod matpower;
mod profiles;
mod validate;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{load_scenario, BusField, ExportLimitsConfig, ScenarioConfig, ScenarioFiles};
pub use matpower::{parse_matpower_case, parse_matpower_case_report, write_matpower_case, CaseReport};
pub use profiles::{parse_profiles, profile_header_steps, write_profiles};
pub use validate::{validate_scenario, ValidationReport, Violation, ViolationKind};

/// Errors raised while parsing or querying network data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing case field `{0}`")]
    MissingField(&'static str),
    #[error("duplicate bus id {0}")]
    DuplicateBus(u32),
    #[error("branch {branch} references unknown bus {bus}")]
    UnknownBranchBus { branch: usize, bus: u32 },
    #[error("nonpositive reactance {reactance} on branch {branch} ({from}-{to})")]
    NonpositiveReactance {
        branch: usize,
        from: u32,
        to: u32,
        reactance: f64,
    },
    #[error("unknown bus id {0}")]
    UnknownBus(u32),
    #[error("empty bus set")]
    EmptyBusSet,
    #[error("profile line {line}: {message}")]
    Profile { line: usize, message: String },
    #[error("negative profile value {value} at line {line}")]
    NegativeProfile { line: usize, value: f64 },
    #[error("unknown energyshed {0}")]
    UnknownShed(usize),
    #[error("zero-demand energyshed {0}")]
    ZeroDemandShed(usize),
    #[error("scenario config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// A network node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: u32,
    /// Nonzero total demand over the horizon.
    pub has_load: bool,
    /// Nominal demand from the case file (MW). Informational only; the
    /// optimization reads demand from [`Profiles`].
    pub nominal_load_mw: f64,
}

/// A line or transformer in the DC model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: u32,
    pub to: u32,
    /// Series reactance, per-unit. Strictly positive.
    pub reactance: f64,
    /// Symmetric flow limit, per-unit; `f64::INFINITY` when unlimited.
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub base_mva: f64,
    pub reference_bus: u32,
}

impl Network {
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Map from bus id to position in `buses`. The first occurrence wins
    /// when ids are duplicated.
    pub fn positions(&self) -> HashMap<u32, usize> {
        let mut map = HashMap::with_capacity(self.buses.len());
        for (pos, bus) in self.buses.iter().enumerate() {
            map.entry(bus.id).or_insert(pos);
        }
        map
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// True when every bus is reachable from the first one.
    pub fn is_connected(&self) -> bool {
        let ids: Vec<u32> = self.buses.iter().map(|b| b.id).collect();
        if ids.is_empty() {
            return false;
        }
        induced_subgraph_connected(self, &ids).unwrap_or(false)
    }
}

/// Whether the subgraph induced by `nodes` is connected.
///
/// Only branches with both endpoints in `nodes` are traversed.
pub fn induced_subgraph_connected(network: &Network, nodes: &[u32]) -> Result<bool, NetError> {
    if nodes.is_empty() {
        return Err(NetError::EmptyBusSet);
    }
    let positions = network.positions();
    let mut local: HashMap<u32, usize> = HashMap::with_capacity(nodes.len());
    for &id in nodes {
        if !positions.contains_key(&id) {
            return Err(NetError::UnknownBus(id));
        }
        let next = local.len();
        local.entry(id).or_insert(next);
    }
    let mut adjacency = vec![Vec::new(); local.len()];
    for br in &network.branches {
        if let (Some(&a), Some(&b)) = (local.get(&br.from), local.get(&br.to)) {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    let mut seen = vec![false; local.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &u in &adjacency[v] {
            if !seen[u] {
                seen[u] = true;
                reached += 1;
                queue.push_back(u);
            }
        }
    }
    Ok(reached == local.len())
}

/// Discrete horizon: `steps` intervals of `step_hours` each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub steps: usize,
    pub step_hours: f64,
}

/// Dense bus × time matrix, rows in network bus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusTimeMatrix {
    buses: usize,
    steps: usize,
    data: Vec<f64>,
}

impl BusTimeMatrix {
    pub fn zeros(buses: usize, steps: usize) -> Self {
        Self::filled(buses, steps, 0.0)
    }

    pub fn filled(buses: usize, steps: usize, value: f64) -> Self {
        Self {
            buses,
            steps,
            data: vec![value; buses * steps],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let buses = rows.len();
        let steps = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(buses * steps);
        for row in &rows {
            assert_eq!(row.len(), steps, "ragged bus-time rows");
            data.extend_from_slice(row);
        }
        Self { buses, steps, data }
    }

    pub fn buses(&self) -> usize {
        self.buses
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn get(&self, bus: usize, t: usize) -> f64 {
        self.data[bus * self.steps + t]
    }

    pub fn set(&mut self, bus: usize, t: usize, value: f64) {
        self.data[bus * self.steps + t] = value;
    }

    pub fn row(&self, bus: usize) -> &[f64] {
        &self.data[bus * self.steps..(bus + 1) * self.steps]
    }

    pub fn row_mut(&mut self, bus: usize) -> &mut [f64] {
        &mut self.data[bus * self.steps..(bus + 1) * self.steps]
    }

    pub fn row_sum(&self, bus: usize) -> f64 {
        self.row(bus).iter().sum()
    }

    pub fn row_max(&self, bus: usize) -> f64 {
        self.row(bus).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }
}

/// Base generation and demand, per-unit power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub gen: BusTimeMatrix,
    pub load: BusTimeMatrix,
}

/// Bounds on net flexibility `P^S = P^{S+} - P^{S-}` at a bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportLimits {
    pub upper: BusTimeMatrix,
    pub lower: BusTimeMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexBudget {
    pub cap_plus: BusTimeMatrix,
    pub cap_minus: BusTimeMatrix,
    pub export_limit: Option<ExportLimits>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shed {
    pub id: usize,
    pub buses: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub sheds: Vec<Shed>,
}

impl Partition {
    /// Sheds numbered 0.. in the given order.
    pub fn from_bus_sets(sets: Vec<Vec<u32>>) -> Self {
        Self {
            sheds: sets
                .into_iter()
                .enumerate()
                .map(|(id, buses)| Shed { id, buses })
                .collect(),
        }
    }

    pub fn shed(&self, id: usize) -> Option<&Shed> {
        self.sheds.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.sheds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sheds.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub network: Network,
    pub time_grid: TimeGrid,
    pub profiles: Profiles,
    pub budgets: FlexBudget,
    pub weights: CostWeights,
    pub partition: Partition,
    pub flex_only_at_load_buses: bool,
}

impl Scenario {
    fn shed_positions(&self, shed: usize) -> Result<Vec<usize>, NetError> {
        let shed = self.partition.shed(shed).ok_or(NetError::UnknownShed(shed))?;
        let positions = self.network.positions();
        shed.buses
            .iter()
            .map(|id| positions.get(id).copied().ok_or(NetError::UnknownBus(*id)))
            .collect()
    }

    /// Bus positions of every shed, in partition order.
    pub fn shed_bus_positions(&self) -> Result<Vec<Vec<usize>>, NetError> {
        self.partition
            .sheds
            .iter()
            .map(|s| self.shed_positions(s.id))
            .collect()
    }

    /// Energy of a bus-time matrix summed over a bus set.
    fn energy(&self, matrix: &BusTimeMatrix, buses: &[usize]) -> f64 {
        buses.iter().map(|&b| matrix.row_sum(b)).sum::<f64>() * self.time_grid.step_hours
    }

    /// Recompute `has_load` from the demand profile.
    pub fn refresh_load_flags(&mut self) {
        for (pos, bus) in self.network.buses.iter_mut().enumerate() {
            bus.has_load = self.profiles.load.row_sum(pos) > 0.0;
        }
    }
}

/// Total demand energy `γ_k` of a shed over the horizon.
pub fn total_demand(scenario: &Scenario, shed: usize) -> Result<f64, NetError> {
    let buses = scenario.shed_positions(shed)?;
    Ok(scenario.energy(&scenario.profiles.load, &buses))
}

/// Ratio of base generation to demand over a shed, before any flexibility.
pub fn baseline_ratio(scenario: &Scenario, shed: usize) -> Result<f64, NetError> {
    let buses = scenario.shed_positions(shed)?;
    let demand = scenario.energy(&scenario.profiles.load, &buses);
    if demand <= 0.0 {
        return Err(NetError::ZeroDemandShed(shed));
    }
    Ok(scenario.energy(&scenario.profiles.gen, &buses) / demand)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Path graph 1 - 2 - ... - n with unit reactance and no flow limits.
    pub fn path_network(n: u32) -> Network {
        Network {
            buses: (1..=n)
                .map(|id| Bus {
                    id,
                    has_load: true,
                    nominal_load_mw: 0.0,
                })
                .collect(),
            branches: (1..n)
                .map(|i| Branch {
                    from: i,
                    to: i + 1,
                    reactance: 0.1,
                    flow_limit: f64::INFINITY,
                })
                .collect(),
            base_mva: 100.0,
            reference_bus: 1,
        }
    }

    pub fn one_bus_scenario(gen: Vec<f64>, load: Vec<f64>) -> Scenario {
        let steps = load.len();
        let network = Network {
            buses: vec![Bus {
                id: 1,
                has_load: true,
                nominal_load_mw: 0.0,
            }],
            branches: vec![],
            base_mva: 100.0,
            reference_bus: 1,
        };
        Scenario {
            name: "one-bus".into(),
            network,
            time_grid: TimeGrid {
                steps,
                step_hours: 1.0,
            },
            profiles: Profiles {
                gen: BusTimeMatrix::from_rows(vec![gen]),
                load: BusTimeMatrix::from_rows(vec![load]),
            },
            budgets: FlexBudget {
                cap_plus: BusTimeMatrix::zeros(1, steps),
                cap_minus: BusTimeMatrix::zeros(1, steps),
                export_limit: None,
            },
            weights: CostWeights {
                alpha: vec![1.0],
                beta: vec![1.0],
            },
            partition: Partition::from_bus_sets(vec![vec![1]]),
            flex_only_at_load_buses: true,
        }
    }
}
