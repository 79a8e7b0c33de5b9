//! Scenario-driven front end for the `eivdesign` library.

pub mod output;
pub mod scenario;

use std::fmt;
use std::path::PathBuf;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};
use eivdesign::equivalence::report;
use eivdesign::solvers::{DEFAULT_SCAN_POINTS, ENDPOINT_OFFSET, ROOT_TOL};
use eivdesign::tables::{self, EFF_TOL, POINT_TOL, SWARM_EFF_TOL};
use eivdesign::{eff_bayes_over_ratios, Design, Error, Sensitivity, VERSION};
use log::info;
use serde_json::{json, Value};

use crate::output::{fixed2, round2, Format, Report};
use crate::scenario::{ConfigError, Scenario, Task};

pub const LOG_ENV: &str = "EIVDESIGN_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "eivdesign",
    version,
    about = "Bayesian D-optimal designs under covariate measurement error"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal saturated design for the scenario's prior
    Solve(Common),
    /// Equivalence-theorem check of `[design]`
    Verify(Common),
    /// Efficiencies of `[[candidates]]` against a reference design
    Efficiency(Common),
    /// Recompute one of the published tables (`[table] id`)
    Table(Common),
    /// Sensitivity trace of `[design]` over the design space
    Sensitivity(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Particle swarm seed, overriding `[optimizer] seed`
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to csv for `sensitivity`, json otherwise
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Command {
    pub fn split(&self) -> (Task, &Common) {
        match self {
            Command::Solve(c) => (Task::Solve, c),
            Command::Verify(c) => (Task::Verify, c),
            Command::Efficiency(c) => (Task::Efficiency, c),
            Command::Table(c) => (Task::Table, c),
            Command::Sensitivity(c) => (Task::Sensitivity, c),
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Numerical(Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config error: {e}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularMatrix(_)
            | Error::NonPositiveDeterminant(_)
            | Error::NoRootFound { .. }
            | Error::NonFiniteCriterion(_) => Failure::Numerical(e),
            other => Failure::Config(ConfigError::new("", other)),
        }
    }
}

pub fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .init();
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let (verb, args) = cli.command.split();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", args.config.display())))?;
    let scenario = Scenario::parse(&text)?;
    let task = scenario.resolve_task(verb)?;
    let format = args.format.unwrap_or(match task {
        Task::Sensitivity => Format::Csv,
        _ => Format::Json,
    });
    let swarm = scenario.swarm(args.seed)?;
    info!("{task}: {}", args.config.display());
    let rep = execute(task, &scenario, &swarm)?;

    let body = match format {
        Format::Json => {
            let prov = provenance(task, &scenario, swarm.seed);
            output::render_json(&prov, &rep.result, timestamp())
        }
        Format::Csv => output::render_csv(&rep.csv_header, &rep.csv_rows)?,
    };
    match args.output.as_ref().or(scenario.output.as_ref()) {
        Some(path) => {
            output::write_atomic(path, &body)?;
            info!("wrote {}", path.display());
            if let Some(extra) = &rep.companion {
                output::write_atomic(&output::companion_path(path), extra)?;
            }
        }
        None => {
            print!("{body}");
            if let Some(extra) = &rep.companion {
                eprint!("{extra}");
            }
        }
    }
    Ok(())
}

/// Runs one task and collects its JSON result and CSV rendering.
pub fn execute(
    task: Task,
    s: &Scenario,
    swarm: &eivdesign::SwarmConfig,
) -> Result<Report, Failure> {
    match task {
        Task::Solve => solve(s, swarm),
        Task::Verify => verify(s),
        Task::Sensitivity => sensitivity(s),
        Task::Efficiency => efficiency(s, swarm),
        Task::Table => table(s, swarm),
    }
}

fn design_json(d: &Design) -> Value {
    json!({ "points": d.points(), "weights": d.weights() })
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn solver_design(
    s: &Scenario,
    swarm: &eivdesign::SwarmConfig,
) -> Result<eivdesign::Solution, Failure> {
    let (model, method) = (s.model()?, s.method()?);
    let prior = s.prior()?;
    let (ratios, _) = s.ratios()?;
    let x_u = s.x_upper()?;
    Ok(eivdesign::solve(
        model, method, &prior, x_u, &ratios, swarm,
    )?)
}

fn solve(s: &Scenario, swarm: &eivdesign::SwarmConfig) -> Result<Report, Failure> {
    let sol = solver_design(s, swarm)?;
    let swarm_json = sol.swarm.as_ref().map(|o| {
        json!({
            "best": o.best,
            "value": o.value,
            "iterations": o.iterations,
            "evaluations": o.evaluations,
            "stagnated": o.stagnated,
        })
    });
    Ok(Report {
        result: json!({
            "design": design_json(&sol.design),
            "criterion": sol.criterion,
            "roots": sol.roots,
            "swarm": swarm_json,
        }),
        csv_header: header(&["point", "weight"]),
        csv_rows: sol
            .design
            .support()
            .map(|(x, w)| vec![x.to_string(), w.to_string()])
            .collect(),
        companion: None,
    })
}

fn sensitivity_of(s: &Scenario, design: &Design) -> Result<Sensitivity, Failure> {
    let (ratios, eta) = s.ratios()?;
    Ok(Sensitivity::with_ratios(
        design,
        s.model()?,
        &s.prior()?,
        &ratios,
        s.method()?,
        eta,
    )?)
}

fn verify(s: &Scenario) -> Result<Report, Failure> {
    let design = s.design()?;
    let sens = sensitivity_of(s, &design)?;
    let rep = report(&sens, &design, &s.space()?, s.grid_size()?, s.tolerance()?)?;
    let mut result = serde_json::to_value(&rep).expect("report serialises");
    result["design"] = design_json(&design);
    result["max_support_gap"] = json!(rep.max_support_gap());
    let verdict = result["verdict"].as_str().unwrap_or_default().to_string();
    let condition = result["condition"].as_str().unwrap_or_default().to_string();
    Ok(Report {
        result,
        csv_header: header(&[
            "sup_sensitivity",
            "bound",
            "argmax_x",
            "max_support_gap",
            "verdict",
            "condition",
        ]),
        csv_rows: vec![vec![
            rep.sup_sensitivity.to_string(),
            rep.bound.to_string(),
            rep.argmax_x.to_string(),
            rep.max_support_gap().to_string(),
            verdict,
            condition,
        ]],
        companion: None,
    })
}

fn sensitivity(s: &Scenario) -> Result<Report, Failure> {
    let design = s.design()?;
    let sens = sensitivity_of(s, &design)?;
    let xs = s.space()?.grid(s.grid_size()?);
    let trace = sens.trace(&xs)?;
    Ok(Report {
        result: json!({
            "design": design_json(&design),
            "bound": sens.bound(),
            "trace": trace,
        }),
        csv_header: header(&["x", "value"]),
        csv_rows: trace
            .iter()
            .map(|(x, v)| vec![x.to_string(), v.to_string()])
            .collect(),
        companion: None,
    })
}

fn efficiency(s: &Scenario, swarm: &eivdesign::SwarmConfig) -> Result<Report, Failure> {
    let candidates = s.candidates()?;
    let (reference, source) = match s.reference()? {
        Some(d) => (d, "config"),
        None => (solver_design(s, swarm)?.design, "solver"),
    };
    let (model, method, prior) = (s.model()?, s.method()?, s.prior()?);
    let (ratios, _) = s.ratios()?;
    let mut rows = Vec::new();
    let mut out = Vec::new();
    for d in &candidates {
        let e = eff_bayes_over_ratios(d, &reference, model, &prior, &ratios, method)?;
        let label: Vec<String> = d.points().iter().map(|x| x.to_string()).collect();
        rows.push(vec![label.join(" "), fixed2(e.percent())]);
        out.push(json!({
            "design": design_json(d),
            "efficiency": e.value,
            "efficiency_pct": round2(e.percent()),
        }));
    }
    Ok(Report {
        result: json!({
            "reference": design_json(&reference),
            "reference_source": source,
            "efficiencies": out,
        }),
        csv_header: header(&["candidate", "efficiency_pct"]),
        csv_rows: rows,
        companion: None,
    })
}

fn table(s: &Scenario, swarm: &eivdesign::SwarmConfig) -> Result<Report, Failure> {
    let t = tables::reproduce(s.table_id()?, swarm)?;
    let mut head = t.key_columns.clone();
    head.extend(t.value_columns());
    let csv_rows = t
        .rows
        .iter()
        .map(|r| {
            r.keys
                .iter()
                .cloned()
                .chain(r.cells.iter().map(|c| fixed2(c.computed)))
                .collect()
        })
        .collect();
    let result = json!({
        "table": t.id,
        "all_pass": t.all_pass(),
        "rows": t.rows.iter().map(|r| json!({
            "keys": r.keys,
            "cells": r.cells.iter().map(|c| json!({
                "column": c.column,
                "computed": c.computed,
                "reported": round2(c.computed),
                "expected": c.expected,
                "tolerance": c.tolerance,
                "passes": c.passes(),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    Ok(Report {
        result,
        csv_header: head,
        csv_rows,
        companion: Some(t.diff_report()),
    })
}

/// Version, seed, numerical tolerances and the scenario as parsed.
pub fn provenance(task: Task, s: &Scenario, seed: u64) -> Value {
    json!({
        "tool": "eivdesign",
        "version": VERSION,
        "task": task.name(),
        "seed": seed,
        "tolerances": {
            "root_tol": ROOT_TOL,
            "endpoint_offset": ENDPOINT_OFFSET,
            "scan_points": DEFAULT_SCAN_POINTS,
            "singular_rtol": eivdesign::linalg::SINGULAR_RTOL,
            "verify_tolerance": s.tolerance().ok(),
            "verify_grid_size": s.grid_size().ok(),
            "table_point_tol": POINT_TOL,
            "table_eff_tol": EFF_TOL,
            "table_swarm_eff_tol": SWARM_EFF_TOL,
        },
        "config": s,
    })
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}
