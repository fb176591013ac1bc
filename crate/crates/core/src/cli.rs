//! Subcommand dispatch for the `netiv` binary.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{
    concave_conjugate, dimension_bounds, lq_spectrum, mf_formalism_check, AnalysisError, CycleKind,
    LqOptions, LqReport,
};
use crate::config::{parse_config, ConfigErrors, RunConfig};
use crate::exec::Execution;
use crate::field::{fmt_sig12, parse_expr, ParameterContext};
use crate::graph::{
    build_graph, contract_single_child, essential_class, rational_string, to_dot, to_json_value, GraphError,
    TransitionGraph,
};

pub const EXIT_GUARANTEED: i32 = 0;
pub const EXIT_NOT_GUARANTEED: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "netiv", version, about = "Net-interval transition graphs for self-similar measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the graph and summarize it.
    Analyze(Flags),
    /// Export the graph as DOT or JSON.
    Graph(Flags),
    /// Local dimensions at periodic points.
    Dims(Flags),
    /// L^q-spectrum estimates and the concave conjugate.
    Lq(Flags),
    /// Combinatorial multifractal-formalism check (exit 0/1/2).
    Check(Flags),
}

#[derive(Debug, Clone, clap::Args)]
pub struct Flags {
    /// TOML configuration file.
    pub config: PathBuf,
    #[arg(long)]
    pub max_vertices: Option<usize>,
    /// Finest scale, as a rational such as 1/4096.
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<String>,
    /// Comma-separated q values.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long)]
    pub max_cycle_len: Option<usize>,
    #[arg(long)]
    pub pump_depth: Option<u32>,
    /// Contract single-child vertices before exporting.
    #[arg(long)]
    pub contract: bool,
    /// Write JSON here (`-` for stdout).
    #[arg(long)]
    pub json: Option<String>,
    /// Write DOT here (`-` for stdout).
    #[arg(long)]
    pub dot: Option<String>,
    /// Write CSV here (`-` for stdout).
    #[arg(long)]
    pub csv: Option<String>,
    /// Disable the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Config(ConfigErrors),
    #[error("{0}")]
    Flag(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl CliError {
    pub fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Io { .. } => "IoError",
            CliError::Config(e) => e.0.first().map_or("ValidationError", |e| e.kind()),
            CliError::Flag(_) => "FlagError",
            CliError::Graph(GraphError::TruncatedGraph(_)) => "TruncatedGraph",
            CliError::Graph(_) => "GraphError",
            CliError::Analysis(AnalysisError::PathBudgetExceeded(_)) => "PathBudgetExceeded",
            CliError::Analysis(_) => "AnalysisError",
        };
        let mut err = json!({ "kind": kind, "message": self.to_string() });
        if let CliError::Config(es) = self {
            err["errors"] = es
                .0
                .iter()
                .map(|e| {
                    let (line, column) = e.location();
                    json!({ "kind": e.kind(), "line": line, "column": column, "message": e.message() })
                })
                .collect();
        }
        json!({ "error": err })
    }
}

/// What a run produced: files to write (path `-` is stdout) and the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<(String, String)>,
    pub exit_code: i32,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn load(flags: &Flags) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&flags.config).map_err(|e| CliError::Io {
        path: flags.config.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = parse_config(&text).map_err(CliError::Config)?;
    if let Some(v) = flags.max_vertices {
        cfg.budget.max_vertices = v;
    }
    if let Some(t) = &flags.t_min {
        let v = parse_expr(&ParameterContext::rationals(), t)
            .ok()
            .and_then(|v| v.as_rational())
            .ok_or_else(|| CliError::Flag(format!("--t-min: '{t}' is not a rational number")))?;
        cfg.analysis.t_min = v;
    }
    if let Some(q) = &flags.q {
        cfg.analysis.q = q
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Flag(format!("--q: '{s}' is not a number")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(m) = flags.max_cycle_len {
        cfg.analysis.max_cycle_len = m;
    }
    if let Some(d) = flags.pump_depth {
        cfg.analysis.pump_depth = d;
    }
    Ok(cfg)
}

fn target(flag: &Option<String>, config: &Option<String>) -> Option<String> {
    flag.clone().or_else(|| config.clone())
}

fn execution(flags: &Flags) -> Execution {
    if flags.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze(f) => analyze(f),
        Command::Graph(f) => graph(f),
        Command::Dims(f) => dims(f),
        Command::Lq(f) => lq(f),
        Command::Check(f) => check(f),
    }
}

fn edge_refs(g: &TransitionGraph, edges: &[usize]) -> Value {
    edges
        .iter()
        .map(|e| {
            let e = g.edge(*e);
            json!({ "id": e.id, "source": e.source, "target": e.target })
        })
        .collect()
}

fn verdict_json(g: &TransitionGraph) -> Result<Value, CliError> {
    let v = mf_formalism_check(g)?;
    Ok(json!({
        "guaranteed": v.guaranteed,
        "witness": v.witness.as_ref().map(|w| edge_refs(g, w)),
        "essential_class": v.essential,
        "note": v.note,
    }))
}

fn analyze(f: &Flags) -> Result<Outcome, CliError> {
    let cfg = load(f)?;
    let g = build_graph(&cfg.ifs, cfg.budget)?;
    let closed = g.status().is_closed();
    let out = json!({
        "format_version": 1,
        "status": g.status().label(),
        "vertices": g.vertex_count(),
        "edges": g.edges().len(),
        "wsc": {
            "max_covering_set": g.wsc().max_covering,
            "bounded_within_explored_region": g.wsc().bounded_within_explored,
        },
        "essential_class": if closed { json!(essential_class(&g)?) } else { Value::Null },
        "formalism": if closed { verdict_json(&g)? } else { Value::Null },
    });
    Ok(Outcome {
        outputs: vec![(target(&f.json, &cfg.output.json).unwrap_or("-".into()), pretty(&out))],
        exit_code: 0,
    })
}

fn graph(f: &Flags) -> Result<Outcome, CliError> {
    let cfg = load(f)?;
    let mut g = build_graph(&cfg.ifs, cfg.budget)?;
    if f.contract {
        g = contract_single_child(&g, None);
    }
    let mut outputs = Vec::new();
    let json_to = target(&f.json, &cfg.output.json);
    let dot_to = target(&f.dot, &cfg.output.dot);
    if let Some(p) = &json_to {
        outputs.push((p.clone(), pretty(&to_json_value(&g))));
    }
    if let Some(p) = &dot_to {
        outputs.push((p.clone(), to_dot(&g)));
    }
    if outputs.is_empty() {
        outputs.push(("-".into(), to_dot(&g)));
    }
    Ok(Outcome { outputs, exit_code: 0 })
}

fn dims(f: &Flags) -> Result<Outcome, CliError> {
    let cfg = load(f)?;
    let g = build_graph(&cfg.ifs, cfg.budget)?;
    let a = &cfg.analysis;
    let b = dimension_bounds(
        &g,
        cfg.ifs.probabilities(),
        a.max_cycle_len,
        a.pump_depth,
        execution(f),
    )?;
    let candidates: Vec<Value> = b
        .candidates
        .iter()
        .map(|c| {
            let kind = match &c.kind {
                CycleKind::Simple => json!({ "type": "simple" }),
                CycleKind::Pumped {
                    first,
                    second,
                    n,
                    pump_second,
                } => json!({
                    "type": "pumped",
                    "first": first,
                    "second": second,
                    "n": n,
                    "pumped": if *pump_second { "second" } else { "first" },
                }),
            };
            json!({
                "edges": c.edges,
                "kind": kind,
                "dimension": fmt_sig12(c.dimension.value),
                "lower": fmt_sig12(c.dimension.lo),
                "upper": fmt_sig12(c.dimension.hi),
            })
        })
        .collect();
    let out = json!({
        "format_version": 1,
        "alpha_min_estimate": fmt_sig12(b.alpha_min),
        "alpha_max_estimate": fmt_sig12(b.alpha_max),
        "alpha_min_cycle": b.candidates[b.argmin].edges,
        "alpha_max_cycle": b.candidates[b.argmax].edges,
        "semantics": "attained values: an upper bound for the least local dimension and a lower bound for the greatest",
        "enumeration_complete": b.complete,
        "nilpotent_cycles": b.nilpotent_cycles,
        "max_cycle_len": a.max_cycle_len,
        "pump_depth": a.pump_depth,
        "cycles": candidates,
    });
    Ok(Outcome {
        outputs: vec![(target(&f.json, &cfg.output.json).unwrap_or("-".into()), pretty(&out))],
        exit_code: 0,
    })
}

fn lq_csv(report: &LqReport, conj: &[(f64, f64)]) -> String {
    let mut s = String::from("series,x,y\n");
    for p in &report.points {
        s.push_str(&format!("tau,{},{}\n", p.q, fmt_sig12(p.tau)));
    }
    for (a, fa) in conj {
        s.push_str(&format!("conjugate,{},{}\n", fmt_sig12(*a), fmt_sig12(*fa)));
    }
    s
}

fn lq(f: &Flags) -> Result<Outcome, CliError> {
    let cfg = load(f)?;
    let g = build_graph(&cfg.ifs, cfg.budget)?;
    let a = &cfg.analysis;
    let opts = LqOptions {
        q: a.q.clone(),
        t_min: a.t_min.clone(),
        schedule_len: a.schedule_len,
        max_paths: a.max_paths,
        execution: execution(f),
    };
    let r = lq_spectrum(&g, cfg.ifs.probabilities(), &opts)?;
    let conj = concave_conjugate(&r);
    let opt = |x: Option<f64>| x.map(fmt_sig12);
    let out = json!({
        "format_version": 1,
        "t_min": rational_string(&a.t_min),
        "scales": r.scales.iter().map(|t| fmt_sig12(*t)).collect::<Vec<_>>(),
        "cut_size": r.cut_size,
        "paths_visited": r.visited,
        "comparability": fmt_sig12(r.comparability),
        "alpha_min_estimate": opt(r.alpha_min),
        "alpha_max_estimate": opt(r.alpha_max),
        "tau": r.points.iter().map(|p| json!({
            "q": p.q.to_string(),
            "tau": fmt_sig12(p.tau),
            "partials": p.partials.iter().map(|x| fmt_sig12(*x)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "conjugate": conj.iter().map(|(x, y)| json!({ "alpha": fmt_sig12(*x), "f": fmt_sig12(*y) })).collect::<Vec<_>>(),
    });
    let mut outputs = Vec::new();
    let json_to = target(&f.json, &cfg.output.json);
    let csv_to = target(&f.csv, &cfg.output.csv);
    if let Some(p) = &csv_to {
        outputs.push((p.clone(), lq_csv(&r, &conj)));
    }
    if json_to.is_some() || csv_to.is_none() {
        outputs.push((json_to.unwrap_or("-".into()), pretty(&out)));
    }
    Ok(Outcome { outputs, exit_code: 0 })
}

fn check(f: &Flags) -> Result<Outcome, CliError> {
    let cfg = load(f)?;
    let g = build_graph(&cfg.ifs, cfg.budget)?;
    let to = target(&f.json, &cfg.output.json).unwrap_or("-".into());
    if let crate::graph::Status::Truncated(reason) = g.status() {
        let out = json!({
            "status": g.status().label(),
            "guaranteed": Value::Null,
            "note": format!("graph not closed within budget ({reason}); the check is undetermined"),
        });
        return Ok(Outcome {
            outputs: vec![(to, pretty(&out))],
            exit_code: EXIT_UNDETERMINED,
        });
    }
    let mut v = verdict_json(&g)?;
    v["status"] = json!(g.status().label());
    let code = if v["guaranteed"] == json!(true) {
        EXIT_GUARANTEED
    } else {
        EXIT_NOT_GUARANTEED
    };
    Ok(Outcome {
        outputs: vec![(to, pretty(&v))],
        exit_code: code,
    })
}

/// Writes outputs; stdout entries are concatenated in order.
pub fn emit(outcome: &Outcome) -> Result<String, CliError> {
    let mut stdout = String::new();
    for (path, content) in &outcome.outputs {
        if path == "-" {
            stdout.push_str(content);
        } else {
            std::fs::write(Path::new(path), content).map_err(|e| CliError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
        }
    }
    Ok(stdout)
}
