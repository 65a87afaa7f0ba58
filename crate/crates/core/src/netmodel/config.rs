//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "name": "ieee39-medium",
//!   "case_file": "case39.m",
//!   "profiles_file": "profiles39.csv",
//!   "step_hours": 1.0,
//!   "reference_bus": 1,
//!   "partition": [[4, 5, 14], [7, 8, 9, 39]],
//!   "alpha": [1.0, 2.0],
//!   "beta": 1.5,
//!   "cap_plus": {"default": 0.0, "buses": {"4": 6.0}},
//!   "cap_minus": 2.0,
//!   "export_limits": {"upper": 0.5},
//!   "flex_only_at_load_buses": true,
//!   "zeta_grid": [0.1, 1.0, 10.0]
//! }
//! ```
//!
//! Per-bus fields accept a scalar, an array in case-file bus order, a
//! bus × time array of arrays (matrices only), or a `{default, buses}`
//! object keyed by bus id. When `flex_only_at_load_buses` is set, the scalar
//! and `default` forms of `cap_plus`/`cap_minus` apply to load buses only;
//! explicit per-bus values are taken literally and checked by validation.
//! Relative file paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    parse_matpower_case_report, parse_profiles, profile_header_steps, BusTimeMatrix, CostWeights,
    ExportLimits, FlexBudget, NetError, Network, Partition, Scenario, TimeGrid,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BusField {
    Uniform(f64),
    PerBus(Vec<f64>),
    PerBusTime(Vec<Vec<f64>>),
    Sparse {
        default: f64,
        buses: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportLimitsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<BusField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<BusField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub case_file: String,
    pub profiles_file: String,
    pub step_hours: f64,
    pub partition: Vec<Vec<u32>>,
    pub alpha: BusField,
    pub beta: BusField,
    pub cap_plus: BusField,
    pub cap_minus: BusField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_limits: Option<ExportLimitsConfig>,
    pub flex_only_at_load_buses: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_bus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_grid: Option<Vec<f64>>,
}

/// A loaded scenario with the raw inputs it came from.
#[derive(Debug, Clone)]
pub struct ScenarioFiles {
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    pub config_text: String,
    pub case_text: String,
    pub profiles_text: String,
    pub warnings: Vec<String>,
}

fn read(path: &Path) -> Result<String, NetError> {
    fs::read_to_string(path).map_err(|e| NetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFiles, NetError> {
    let path = path.as_ref();
    let config_text = read(path)?;
    let config: ScenarioConfig =
        serde_json::from_str(&config_text).map_err(|e| NetError::Config(e.to_string()))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |p: &str| -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            dir.join(p)
        }
    };
    let case_text = read(&resolve(&config.case_file))?;
    let profiles_text = read(&resolve(&config.profiles_file))?;
    let default_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let (scenario, warnings) = config.build(&case_text, &profiles_text, &default_name)?;
    Ok(ScenarioFiles {
        scenario,
        config,
        config_text,
        case_text,
        profiles_text,
        warnings,
    })
}

impl ScenarioConfig {
    /// Assemble a scenario from already-read case and profile texts.
    pub fn build(
        &self,
        case_text: &str,
        profiles_text: &str,
        default_name: &str,
    ) -> Result<(Scenario, Vec<String>), NetError> {
        let report = parse_matpower_case_report(case_text)?;
        let mut network: Network = report.network;
        if let Some(r) = self.reference_bus {
            if network.position(r).is_none() {
                return Err(NetError::UnknownBus(r));
            }
            network.reference_bus = r;
        }
        let steps = profile_header_steps(profiles_text)?;
        let time_grid = TimeGrid {
            steps,
            step_hours: self.step_hours,
        };
        let profiles = parse_profiles(profiles_text, &network, &time_grid)?;

        let mut scenario = Scenario {
            name: self.name.clone().unwrap_or_else(|| default_name.to_string()),
            network,
            time_grid,
            profiles,
            budgets: FlexBudget {
                cap_plus: BusTimeMatrix::zeros(0, 0),
                cap_minus: BusTimeMatrix::zeros(0, 0),
                export_limit: None,
            },
            weights: CostWeights {
                alpha: vec![],
                beta: vec![],
            },
            partition: Partition::from_bus_sets(self.partition.clone()),
            flex_only_at_load_buses: self.flex_only_at_load_buses,
        };
        scenario.refresh_load_flags();

        let net = &scenario.network;
        let mask: Option<Vec<bool>> = self
            .flex_only_at_load_buses
            .then(|| net.buses.iter().map(|b| b.has_load).collect());
        let cap_plus = expand_matrix("cap_plus", &self.cap_plus, net, steps, mask.as_deref(), 0.0)?;
        let cap_minus = expand_matrix("cap_minus", &self.cap_minus, net, steps, mask.as_deref(), 0.0)?;
        let export_limit = match &self.export_limits {
            None => None,
            Some(cfg) => Some(ExportLimits {
                upper: match &cfg.upper {
                    Some(f) => expand_matrix("export_limits.upper", f, net, steps, None, 0.0)?,
                    None => BusTimeMatrix::filled(net.bus_count(), steps, f64::INFINITY),
                },
                lower: match &cfg.lower {
                    Some(f) => expand_matrix("export_limits.lower", f, net, steps, None, 0.0)?,
                    None => BusTimeMatrix::filled(net.bus_count(), steps, f64::NEG_INFINITY),
                },
            }),
        };
        let alpha = expand_vector("alpha", &self.alpha, net)?;
        let beta = expand_vector("beta", &self.beta, net)?;
        scenario.budgets = FlexBudget {
            cap_plus,
            cap_minus,
            export_limit,
        };
        scenario.weights = CostWeights { alpha, beta };
        Ok((scenario, report.warnings))
    }
}

fn sparse_lookup(
    name: &str,
    buses: &BTreeMap<String, f64>,
    network: &Network,
) -> Result<BTreeMap<usize, f64>, NetError> {
    let mut out = BTreeMap::new();
    for (key, &value) in buses {
        let id: u32 = key
            .trim()
            .parse()
            .map_err(|_| NetError::Config(format!("{name}: invalid bus key `{key}`")))?;
        let pos = network.position(id).ok_or(NetError::UnknownBus(id))?;
        out.insert(pos, value);
    }
    Ok(out)
}

fn expand_matrix(
    name: &str,
    field: &BusField,
    network: &Network,
    steps: usize,
    mask: Option<&[bool]>,
    masked_value: f64,
) -> Result<BusTimeMatrix, NetError> {
    let n = network.bus_count();
    let masked = |pos: usize, v: f64| match mask {
        Some(m) if !m[pos] => masked_value,
        _ => v,
    };
    let rows: Vec<Vec<f64>> = match field {
        BusField::Uniform(v) => (0..n).map(|b| vec![masked(b, *v); steps]).collect(),
        BusField::PerBus(values) => {
            if values.len() != n {
                return Err(NetError::Config(format!(
                    "{name}: {} values for {n} buses",
                    values.len()
                )));
            }
            values.iter().map(|&v| vec![v; steps]).collect()
        }
        BusField::PerBusTime(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != steps) {
                return Err(NetError::Config(format!("{name}: expected a {n} x {steps} matrix")));
            }
            rows.clone()
        }
        BusField::Sparse { default, buses } => {
            let explicit = sparse_lookup(name, buses, network)?;
            (0..n)
                .map(|b| {
                    let v = explicit.get(&b).copied().unwrap_or_else(|| masked(b, *default));
                    vec![v; steps]
                })
                .collect()
        }
    };
    if n == 0 {
        return Ok(BusTimeMatrix::zeros(0, steps));
    }
    Ok(BusTimeMatrix::from_rows(rows))
}

fn expand_vector(name: &str, field: &BusField, network: &Network) -> Result<Vec<f64>, NetError> {
    let n = network.bus_count();
    match field {
        BusField::Uniform(v) => Ok(vec![*v; n]),
        BusField::PerBus(values) if values.len() == n => Ok(values.clone()),
        BusField::PerBus(values) => Err(NetError::Config(format!(
            "{name}: {} values for {n} buses",
            values.len()
        ))),
        BusField::PerBusTime(_) => Err(NetError::Config(format!("{name} must be a per-bus vector"))),
        BusField::Sparse { default, buses } => {
            let explicit = sparse_lookup(name, buses, network)?;
            Ok((0..n).map(|b| explicit.get(&b).copied().unwrap_or(*default)).collect())
        }
    }
}
