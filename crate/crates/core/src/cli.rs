//! The `eshed` command-line front end.
//!
//! Every command loads a scenario config, writes its outputs into `--out`
//! and finishes with a `manifest.json` recording input hashes, the effective
//! configuration and the exit status. `result.json` always holds the full
//! structured result; with `--format csv` the tabular parts are also written
//! as CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analytic::{
    capacity_curve, max_ratio_constrained, max_ratio_unconstrained, required_budget, AnalyticError,
    CapacityCurvePoint, CommunitySeries, CurveMode,
};
use crate::netmodel::{load_scenario, validate_scenario, Scenario, ScenarioFiles};
use crate::policy::{self, default_zeta_grid, PolicyConfig, Trace};
use crate::problems::{solve_p1, OperationReport};
use crate::{Error, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "eshed", version, about = "Energyshed analysis and policy design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "eshed-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweeps.
    #[arg(long, env = "ESHED_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct Bracket {
    #[arg(long, default_value_t = 0.0)]
    pub tau_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau_hi: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Sweep {
    #[arg(long, default_value_t = 0.01)]
    pub mesh: f64,
    #[arg(long, default_value_t = 1)]
    pub refine_rounds: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check a scenario and list every violation.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form capacity curves per energyshed.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Largest normalized budget on the curve.
        #[arg(long, default_value_t = 2.0)]
        budget_max: f64,
        #[arg(long, default_value_t = 0.02)]
        budget_step: f64,
    },
    /// Least-cost operation under given ratio requirements.
    SolveP1 {
        #[command(flatten)]
        common: Common,
        /// One value for every energyshed, or a file with one value per shed.
        #[arg(long)]
        x_min: String,
    },
    /// Largest common ratio requirement, by bisection.
    DesignP2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[command(flatten)]
        bracket: Bracket,
        /// Double the upper bracket end until infeasible.
        #[arg(long)]
        expand: bool,
    },
    /// Cost-aware requirement design for one weight.
    DesignP4 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        zeta: f64,
        #[command(flatten)]
        sweep: Sweep,
        #[command(flatten)]
        bracket: Bracket,
    },
    /// Cost-aware designs across a weight grid.
    Pareto {
        #[command(flatten)]
        common: Common,
        /// File of weights; defaults to the scenario's grid, then a built-in
        /// logarithmic grid.
        #[arg(long)]
        zeta_grid: Option<PathBuf>,
        #[command(flatten)]
        sweep: Sweep,
        #[command(flatten)]
        bracket: Bracket,
    },
    /// Least-cost operation without ratio requirements.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Analyze { .. } => "analyze",
            Command::SolveP1 { .. } => "solve-p1",
            Command::DesignP2 { .. } => "design-p2",
            Command::DesignP4 { .. } => "design-p4",
            Command::Pareto { .. } => "pareto",
            Command::Baseline { .. } => "baseline",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Validate { common }
            | Command::Analyze { common, .. }
            | Command::SolveP1 { common, .. }
            | Command::DesignP2 { common, .. }
            | Command::DesignP4 { common, .. }
            | Command::Pareto { common, .. }
            | Command::Baseline { common } => common,
        }
    }
}

#[derive(Debug, Serialize)]
struct FileDigest {
    role: String,
    path: String,
    sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Collects output files and input digests for the manifest.
struct Run {
    out: PathBuf,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    notes: Vec<String>,
}

impl Run {
    fn input(&mut self, role: &str, path: &str, content: &[u8]) {
        self.inputs.push(FileDigest {
            role: role.into(),
            path: path.into(),
            sha256: sha256_hex(content),
        });
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), Error> {
        let path = self.out.join(name);
        fs::create_dir_all(&self.out).map_err(|source| Error::Output {
            path: self.out.clone(),
            source,
        })?;
        fs::write(&path, content).map_err(|source| Error::Output { path, source })?;
        self.outputs.push(FileDigest {
            role: "output".into(),
            path: name.into(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, &text)
    }
}

fn read_input(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

/// Numbers from a JSON array or from text separated by commas, whitespace
/// or newlines.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>, Error> {
    if let Ok(values) = serde_json::from_str::<Vec<f64>>(text) {
        return Ok(values);
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Input(format!("`{t}` is not a number")))
        })
        .collect()
}

fn load(common: &Common, run: &mut Run) -> Result<ScenarioFiles, Error> {
    let files = load_scenario(&common.scenario)?;
    run.input("scenario", &common.scenario.display().to_string(), files.config_text.as_bytes());
    run.input("case", &files.config.case_file, files.case_text.as_bytes());
    run.input("profiles", &files.config.profiles_file, files.profiles_text.as_bytes());
    for w in &files.warnings {
        eprintln!("warning: {w}");
        run.notes.push(w.clone());
    }
    Ok(files)
}

fn load_valid(common: &Common, run: &mut Run) -> Result<ScenarioFiles, Error> {
    let files = load(common, run)?;
    let report = validate_scenario(&files.scenario);
    if !report.is_empty() {
        return Err(Error::Problem(crate::problems::ProblemError::InvalidScenario(report)));
    }
    Ok(files)
}

fn policy_config(common: &Common, bracket: Option<&Bracket>, sweep: Option<&Sweep>) -> PolicyConfig {
    let mut cfg = PolicyConfig {
        threads: common.threads,
        ..PolicyConfig::default()
    };
    if let Some(b) = bracket {
        cfg.tau_lo = b.tau_lo;
        cfg.tau_hi = b.tau_hi;
    }
    if let Some(s) = sweep {
        cfg.mesh = s.mesh;
        cfg.refine_rounds = s.refine_rounds;
    }
    cfg
}

fn write_report(run: &mut Run, format: Format, report: &OperationReport) -> Result<(), Error> {
    if format == Format::Csv {
        run.write("report.csv", &report.to_csv())?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ShedAnalysis {
    shed: usize,
    buses: Vec<u32>,
    gamma: f64,
    baseline_ratio: f64,
    /// Ratio reachable with the scenario's own added-generation budget.
    max_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_ratio_with_limits: Option<f64>,
    /// Added-generation energy needed to reach a ratio of one.
    budget_for_unity: f64,
    curves: Vec<CurveSeries>,
}

#[derive(Debug, Serialize)]
struct CurveSeries {
    mode: CurveMode,
    /// Set when the curve stops early because the closed form no longer
    /// applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    truncated: Option<String>,
    points: Vec<CapacityCurvePoint>,
}

/// Aggregate each energyshed into one community series.
pub fn community_series(s: &Scenario) -> Result<Vec<CommunitySeries>, Error> {
    let nt = s.time_grid.steps;
    let limits = s.budgets.export_limit.as_ref();
    s.shed_bus_positions()?
        .iter()
        .map(|buses| {
            let sum = |f: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
                (0..nt).map(|t| buses.iter().map(|&i| f(i, t)).sum()).collect()
            };
            let export_limit = limits
                .map(|l| sum(&|i, t| l.upper.get(i, t)))
                .filter(|v| v.iter().all(|x| x.is_finite()));
            Ok(CommunitySeries {
                gen: sum(&|i, t| s.profiles.gen.get(i, t)),
                load: sum(&|i, t| s.profiles.load.get(i, t)),
                cap_plus: sum(&|i, t| s.budgets.cap_plus.get(i, t)),
                export_limit,
            })
        })
        .collect()
}

fn curve_until_regime_change(
    c: &CommunitySeries,
    grid: &[f64],
    mode: CurveMode,
) -> Result<CurveSeries, Error> {
    let mut points = Vec::with_capacity(grid.len());
    for &b in grid {
        match capacity_curve(c, &[b], mode) {
            Ok(mut p) => points.append(&mut p),
            Err(AnalyticError::SubUnityExportRegime) => {
                return Ok(CurveSeries {
                    mode,
                    truncated: Some(format!("closed form stops applying above budget {b}")),
                    points,
                })
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(CurveSeries { mode, truncated: None, points })
}

fn analyze(s: &Scenario, budget_max: f64, budget_step: f64) -> Result<Vec<ShedAnalysis>, Error> {
    if !(budget_step > 0.0 && budget_max >= 0.0 && budget_max.is_finite()) {
        return Err(Error::Input("budget grid needs a positive step and a nonnegative maximum".into()));
    }
    let n = (budget_max / budget_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 * budget_step).collect();
    let mut out = Vec::new();
    for (k, c) in community_series(s)?.into_iter().enumerate() {
        let x0 = c.baseline_ratio()?;
        let mut unlimited = c.clone();
        unlimited.export_limit = None;
        let mut modes = vec![CurveMode::Unconstrained, CurveMode::ZeroExport];
        if c.export_limit.is_some() {
            modes.insert(1, CurveMode::Limits);
        }
        let curves = modes
            .into_iter()
            .map(|m| curve_until_regime_change(&c, &grid, m))
            .collect::<Result<_, _>>()?;
        let max_ratio_with_limits = match &c.export_limit {
            Some(_) => match max_ratio_constrained(&c) {
                Ok(v) => Some(v),
                Err(AnalyticError::SubUnityExportRegime) => None,
                Err(e) => return Err(e.into()),
            },
            None => None,
        };
        out.push(ShedAnalysis {
            shed: s.partition.sheds[k].id,
            buses: s.partition.sheds[k].buses.clone(),
            gamma: c.gamma(),
            baseline_ratio: x0,
            max_ratio: max_ratio_unconstrained(&unlimited)?,
            max_ratio_with_limits,
            budget_for_unity: if x0 < 1.0 { required_budget(1.0, x0, c.gamma())? } else { 0.0 },
            curves,
        });
    }
    Ok(out)
}

fn curves_csv(sheds: &[ShedAnalysis]) -> String {
    let mut out = String::from("shed,budget,budget_total,max_ratio,mode\n");
    for s in sheds {
        for c in &s.curves {
            for p in &c.points {
                let _ = writeln!(
                    out,
                    "{},{:?},{:?},{:?},{}",
                    s.shed,
                    p.budget,
                    p.budget_total,
                    p.max_ratio,
                    c.mode.as_str()
                );
            }
        }
    }
    out
}

fn execute(cmd: &Command, run: &mut Run) -> Result<Value, Error> {
    match cmd {
        Command::Validate { common } => {
            let files = load(common, run)?;
            let report = validate_scenario(&files.scenario);
            run.write_json(
                "result.json",
                &json!({ "violations": report.violations, "warnings": files.warnings }),
            )?;
            if report.is_empty() {
                println!("scenario `{}` is valid", files.scenario.name);
                Ok(json!({}))
            } else {
                Err(Error::Problem(crate::problems::ProblemError::InvalidScenario(report)))
            }
        }
        Command::Analyze { common, budget_max, budget_step } => {
            let files = load_valid(common, run)?;
            let sheds = analyze(&files.scenario, *budget_max, *budget_step)?;
            for s in &sheds {
                println!(
                    "shed {}: baseline ratio {:.4}, reachable {:.4}, budget for ratio 1: {:.4}",
                    s.shed, s.baseline_ratio, s.max_ratio, s.budget_for_unity
                );
            }
            if common.format == Format::Csv {
                run.write("capacity_curves.csv", &curves_csv(&sheds))?;
            }
            run.write_json("result.json", &sheds)?;
            Ok(json!({ "budget_max": budget_max, "budget_step": budget_step }))
        }
        Command::SolveP1 { common, x_min } => {
            let files = load_valid(common, run)?;
            let s = &files.scenario;
            let values = match x_min.trim().parse::<f64>() {
                Ok(v) => vec![v],
                Err(_) => {
                    let text = read_input(Path::new(x_min))?;
                    run.input("x_min", x_min, text.as_bytes());
                    parse_number_list(&text)?
                }
            };
            let x_min = if values.len() == 1 { vec![values[0]; s.partition.len()] } else { values };
            let cfg = PolicyConfig::default();
            match solve_p1(s, &x_min, &cfg.solver)? {
                None => {
                    run.write_json("result.json", &json!({ "feasible": false, "x_min": x_min }))?;
                    Err(Error::Infeasible("the ratio requirements cannot be met".into()))
                }
                Some((report, sol)) => {
                    println!(
                        "optimal cost {:.6}, minimum ratio {:.6}, {} iterations",
                        sol.objective,
                        report.min_ratio(),
                        sol.iterations
                    );
                    write_report(run, common.format, &report)?;
                    run.write_json(
                        "result.json",
                        &json!({ "x_min": x_min, "objective": sol.objective, "report": report }),
                    )?;
                    Ok(json!({ "x_min": x_min, "solver": cfg.solver }))
                }
            }
        }
        Command::DesignP2 { common, epsilon, bracket, expand } => {
            let files = load_valid(common, run)?;
            let mut cfg = policy_config(common, Some(bracket), None);
            cfg.epsilon = *epsilon;
            cfg.expand_bracket = *expand;
            let r = policy::solve_p2(&files.scenario, &cfg)?;
            if let Trace::Bisection(probes) = &r.trace {
                if !policy::probes_are_monotone(probes) {
                    eprintln!("warning: feasibility was not monotone along the bisection trace");
                }
            }
            println!(
                "tau* = {:.7} after {} probes, cost {:.6} ({:.4} x baseline)",
                r.tau_star,
                r.trace.len(),
                r.cost,
                r.cost_normalized
            );
            if common.format == Format::Csv {
                run.write("trace.csv", &r.trace.to_csv())?;
            }
            write_report(run, common.format, &r.report)?;
            run.write_json("result.json", &r)?;
            Ok(serde_json::to_value(&cfg).expect("serializable config"))
        }
        Command::DesignP4 { common, zeta, sweep, bracket } => {
            let files = load_valid(common, run)?;
            let cfg = policy_config(common, Some(bracket), Some(sweep));
            let r = policy::solve_p4(&files.scenario, *zeta, &cfg)?;
            println!(
                "tau* = {:.4}, f* = {:.6}, cost {:.6} ({:.4} x baseline), {} evaluations",
                r.tau_star,
                r.f_star.unwrap_or(f64::NAN),
                r.cost,
                r.cost_normalized,
                r.trace.len()
            );
            if common.format == Format::Csv {
                run.write("trace.csv", &r.trace.to_csv())?;
            }
            write_report(run, common.format, &r.report)?;
            run.write_json("result.json", &r)?;
            let mut value = serde_json::to_value(&cfg).expect("serializable config");
            value["zeta"] = json!(zeta);
            Ok(value)
        }
        Command::Pareto { common, zeta_grid, sweep, bracket } => {
            let files = load_valid(common, run)?;
            let mut cfg = policy_config(common, Some(bracket), Some(sweep));
            cfg.zeta_grid = match zeta_grid {
                Some(path) => {
                    let text = read_input(path)?;
                    run.input("zeta_grid", &path.display().to_string(), text.as_bytes());
                    parse_number_list(&text)?
                }
                None => files.config.zeta_grid.clone().unwrap_or_else(default_zeta_grid),
            };
            let front = policy::pareto_front(&files.scenario, &cfg)?;
            let slack = cfg.mesh / 10f64.powi(cfg.refine_rounds as i32);
            let monotone = front.is_monotone(slack);
            if !monotone {
                eprintln!("warning: tau* is not nondecreasing in zeta on this grid");
            }
            for p in &front.points {
                println!("zeta {:>12.6} tau* {:.4} cost {:.4}", p.zeta, p.tau_star, p.cost_normalized);
            }
            if common.format == Format::Csv {
                run.write("pareto.csv", &front.to_csv())?;
            }
            run.write_json("result.json", &json!({ "front": front, "monotone": monotone }))?;
            Ok(serde_json::to_value(&cfg).expect("serializable config"))
        }
        Command::Baseline { common } => {
            let files = load_valid(common, run)?;
            let cfg = policy_config(common, None, None);
            let (cost, report) = policy::baseline(&files.scenario, &cfg)?;
            println!("baseline cost {cost:.6}, minimum ratio {:.6}", report.min_ratio());
            write_report(run, common.format, &report)?;
            run.write_json("result.json", &json!({ "baseline_cost": cost, "report": report }))?;
            Ok(serde_json::to_value(&cfg).expect("serializable config"))
        }
    }
}

/// Run one command and return the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let common = cli.command.common();
    let mut run = Run {
        out: common.out.clone(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        notes: Vec::new(),
    };
    let outcome = execute(&cli.command, &mut run);
    let (code, error, config) = match outcome {
        Ok(config) => (EXIT_OK, None, config),
        Err(e) => {
            eprintln!("error: {e}");
            (e.exit_code(), Some(e.to_string()), Value::Null)
        }
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "tool": "eshed",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "arguments": &cli.command,
        "config": config,
        "exit_code": code,
        "error": error,
        "warnings": run.notes,
        "inputs": run.inputs,
        "outputs": run.outputs,
        "timestamp_unix": timestamp,
    });
    match run.write_json("manifest.json", &manifest) {
        Ok(()) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if code == EXIT_OK { e.exit_code() } else { code }
        }
    }
}
