//! `rotkit` — analyze continuous degree-one maps on lifted graph spaces.
//!
//! Subcommands:
//! * `analyze`    — rotation set, transitivity, combedness, envelope cross-check
//! * `periods`    — set of minimal periods (mod 1) in a rotation class
//! * `orbit`      — CSV trace of a point orbit
//! * `export-dot` — deterministic DOT export of the transition graph
//!
//! Exit codes: 0 success, 2 input error, 3 budget exceeded (partial results
//! were still printed and are certified as far as they go).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotkit::lifted_graph::Point;
use rotkit::markov_graph::MarkovGraph;
use rotkit::markov_map::MarkovMap;
use rotkit::model::ModelFile;
use rotkit::orbit_engine::periods_for_rotation;
use num_traits::Signed;
use rotkit::{parse_rational, rational_to_string, report, Rational};

#[derive(Parser)]
#[command(name = "rotkit", version, about = "Rotation sets and period tables for degree-one maps on lifted graph spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Model file (JSON)
    model: String,
    /// Report format
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
    /// Iteration horizon for empirical rotation estimates
    #[arg(long, default_value_t = 200)]
    horizon: u32,
    /// Maximum denominator tried when searching exact rotation numbers
    #[arg(long, default_value_t = 64)]
    qmax: u32,
    /// Expansion budget for period searches (overridden by ROTKIT_BUDGET)
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Seed for randomized sampling (reserved; analyses here are deterministic)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: rotation set, transitivity, combedness, envelopes
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Minimal periods (mod 1) realised in the rotation class p/q
    Periods {
        #[command(flatten)]
        common: Common,
        /// Rotation number p/q in lowest terms
        #[arg(long)]
        rho: String,
        /// Largest period reported
        #[arg(long, default_value_t = 20)]
        max: u64,
    },
    /// CSV trace of the orbit of a point
    Orbit {
        #[command(flatten)]
        common: Common,
        /// Point: a node name, `EDGE@t` with t in [0,1], or `spine@x`
        #[arg(long)]
        point: String,
        /// Number of iteration steps
        #[arg(long, default_value_t = 10)]
        steps: u32,
    },
    /// DOT export of the labeled transition graph
    ExportDot {
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &str) -> Result<(ModelFile, MarkovMap), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let model = ModelFile::from_json(&text).map_err(|e| format!("{path}: {e}"))?;
    let (_, map) = model.build().map_err(|e| format!("{path}: {e}"))?;
    Ok((model, map))
}

fn effective_budget(common: &Common) -> u64 {
    match std::env::var("ROTKIT_BUDGET") {
        Ok(v) => v.parse().unwrap_or(common.budget),
        Err(_) => common.budget,
    }
}

/// Parses `--point`: a node name, `EDGE@t`, or `spine@x`.
fn parse_point(map: &MarkovMap, spec: &str) -> Result<Point, String> {
    let g = map.graph();
    if let Some((head, tail)) = spec.split_once('@') {
        let x: Rational = parse_rational(tail).map_err(|e| format!("bad coordinate {tail:?}: {e}"))?;
        if head == "spine" {
            return Ok(g.spine_point(&x));
        }
        let e = g
            .edge_by_name(head)
            .ok_or_else(|| format!("no edge named {head:?}"))?;
        if x.is_negative() || x > Rational::from_integer(1.into()) {
            return Err(format!("edge parameter {tail} outside [0, 1]"));
        }
        return Ok(g.point(e, x, 0));
    }
    let n = g
        .node_by_name(spec)
        .ok_or_else(|| format!("no node or point spec {spec:?}"))?;
    Ok(g.node_point(g.canonical_node_position(n, 0)))
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { common } => {
            let (model, map) = load(&common.model)?;
            let r = report::analyze(&model.name, &map, common.qmax, common.horizon);
            match common.report {
                ReportFormat::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&r).expect("report serialization")
                ),
                ReportFormat::Text => print!("{}", report::analyze_text(&r)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Periods { common, rho, max } => {
            let (model, map) = load(&common.model)?;
            let (p, q) = parse_rho(&rho)?;
            let search = periods_for_rotation(&map, p, q, max, effective_budget(&common));
            let r = report::periods(&model.name, p, q, max, &search);
            match common.report {
                ReportFormat::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&r).expect("report serialization")
                ),
                ReportFormat::Text => print!("{}", report::periods_text(&r)),
            }
            if search.complete {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Command::Orbit {
            common,
            point,
            steps,
        } => {
            let (_, map) = load(&common.model)?;
            let x = parse_point(&map, &point)?;
            let orbit = map.iterate(&x, steps as usize);
            let g = map.graph();
            println!("step,edge,t,shift,retract");
            for (i, p) in orbit.iter().enumerate() {
                println!(
                    "{},{},{},{},{}",
                    i + 1,
                    g.edges()[p.edge()].name,
                    rational_to_string(p.t()),
                    p.shift(),
                    rational_to_string(&g.retract(p)),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportDot { common } => {
            let (_, map) = load(&common.model)?;
            let graph = MarkovGraph::from_map(&map);
            print!("{}", graph.export_dot());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Parses `--rho p/q`, requiring lowest terms.
fn parse_rho(s: &str) -> Result<(i64, u64), String> {
    let (ps, qs) = s.split_once('/').unwrap_or((s, "1"));
    let p: i64 = ps
        .trim()
        .parse()
        .map_err(|_| format!("bad rotation number {s:?}"))?;
    let q: u64 = qs
        .trim()
        .parse()
        .map_err(|_| format!("bad rotation number {s:?}"))?;
    if q == 0 {
        return Err(format!("bad rotation number {s:?}: zero denominator"));
    }
    if num_integer::gcd(p.unsigned_abs(), q) != 1 {
        return Err(format!("rotation number {s} is not coprime"));
    }
    Ok((p, q))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
