use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use oracle_core::dominance::{common_objective_condition, det_dominates, garbling_exists, unique_ckc_dominates};
use oracle_core::error::Error;
use oracle_core::harness::{fixture_names, run_fixture, FixtureReport};
use oracle_core::io::{atlas_json, matrix_json, parse_matrix, parse_signaling, parse_structure, partition_json, read_json_file};
use oracle_core::lattice::ckc_decompose;
use oracle_core::signaling::posterior_atlas;
use oracle_core::types::InformationStructure;

/// Compare public-information oracles on finite information structures.
#[derive(Parser)]
#[command(name = "oracles", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Deterministic,
    UniqueCkc,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Common knowledge components of the players' partitions.
    Ckc { structure: String },
    /// Whether oracle F1 is individually more informative than F2.
    Imi { structure: String, f1: String, f2: String },
    /// Dominance of F1 over F2 under deterministic or stochastic signaling.
    Dominates {
        structure: String,
        f1: String,
        f2: String,
        #[arg(long, value_enum, default_value = "deterministic")]
        mode: Mode,
    },
    /// Posterior atlas of a signaling on a structure.
    Post {
        structure: String,
        tau: String,
        /// Signaling name when TAU is a fixture file.
        #[arg(long)]
        name: Option<String>,
    },
    /// Whether some row-stochastic G satisfies M1 G = M2.
    GarbleCheck { m1: String, m2: String },
    /// Whether F1 is preferred to F2 in every common-objective game.
    CommonObjective { structure: String, f1: String, f2: String },
    /// Run fixture claims; prints one line per claim.
    Verify {
        fixture: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        parallel: bool,
    },
    /// Full report for the named fixtures, or all of them.
    Report {
        fixtures: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        parallel: bool,
    },
}

fn load_structure(file: &str) -> Result<InformationStructure, Error> {
    let v = read_json_file(file)?;
    match v.get("structure") {
        Some(s) => parse_structure(s, &format!("{file}:structure")),
        None => parse_structure(&v, file),
    }
}

fn verdict(relation: &str, holds: bool, witness: Option<Value>) -> Value {
    let mut v = json!({"relation": relation, "holds": holds});
    if let Some(w) = witness {
        v["witness"] = w;
    }
    v
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn run_reports(names: &[String], parallel: bool) -> Result<Vec<FixtureReport>, Error> {
    if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = names.iter().map(|n| scope.spawn(move || run_fixture(n))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("fixture thread panicked"))
                .collect()
        })
    } else {
        names.iter().map(|n| run_fixture(n)).collect()
    }
}

fn report_status(reports: &[FixtureReport]) -> ExitCode {
    if reports.iter().any(FixtureReport::hit_resource_cap) {
        ExitCode::from(3)
    } else if reports.iter().all(FixtureReport::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn all_names() -> Vec<String> {
    fixture_names().into_iter().map(str::to_string).collect()
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Ckc { structure } => {
            let s = load_structure(&structure)?;
            let m = ckc_decompose(&s.player_partitions())?;
            print_json(&json!({"relation": "ckc", "count": m.num_blocks(), "blocks": partition_json(&m, &s.space)}));
        }
        Command::Imi { structure, f1, f2 } => {
            let s = load_structure(&structure)?;
            let v = det_dominates(&s, s.partition(&f1)?, s.partition(&f2)?)?;
            print_json(&verdict("imi", v.holds, v.witness.map(|w| partition_json(&w, &s.space))));
        }
        Command::Dominates { structure, f1, f2, mode } => {
            let s = load_structure(&structure)?;
            let (p1, p2) = (s.partition(&f1)?, s.partition(&f2)?);
            let out = match mode {
                Mode::Deterministic => {
                    let v = det_dominates(&s, p1, p2)?;
                    verdict("dominates-deterministic", v.holds, v.witness.map(|w| partition_json(&w, &s.space)))
                }
                Mode::UniqueCkc => verdict("dominates-unique-ckc", unique_ckc_dominates(&s, p1, p2)?, None),
            };
            print_json(&out);
        }
        Command::Post { structure, tau, name } => {
            let s = load_structure(&structure)?;
            let v = read_json_file(&tau)?;
            let (sig, path) = match (&name, v.get("signalings")) {
                (Some(n), Some(all)) => (
                    all.get(n)
                        .ok_or_else(|| Error::Usage(format!("no signaling {n:?} in {tau}")))?,
                    format!("{tau}:signalings.{n}"),
                ),
                (None, Some(_)) => return Err(Error::Usage(format!("{tau} holds several signalings; pick one with --name"))),
                _ => (&v, tau.clone()),
            };
            let (t, _) = parse_signaling(&s, sig, &path)?;
            print_json(&json!({"relation": "posterior-atlas", "atlas": atlas_json(&s, &posterior_atlas(&s, &t)?)}));
        }
        Command::GarbleCheck { m1, m2 } => {
            let a = parse_matrix(&read_json_file(&m1)?, &m1)?;
            let b = parse_matrix(&read_json_file(&m2)?, &m2)?;
            let g = garbling_exists(&a, &b)?;
            print_json(&verdict("garbling", g.is_some(), g.map(|rows| matrix_json(&rows))));
        }
        Command::CommonObjective { structure, f1, f2 } => {
            let s = load_structure(&structure)?;
            let holds = common_objective_condition(&s, s.partition(&f1)?, s.partition(&f2)?)?;
            print_json(&verdict("common-objective", holds, None));
        }
        Command::Verify { fixture, all, parallel } => {
            let names = match (fixture, all) {
                (Some(_), true) => return Err(Error::Usage("give a fixture name or --all, not both".into())),
                (Some(n), false) => vec![n],
                (None, true) => all_names(),
                (None, false) => {
                    return Err(Error::Usage(format!(
                        "name a fixture or pass --all; available: {}",
                        fixture_names().join(", ")
                    )))
                }
            };
            let reports = run_reports(&names, parallel)?;
            for r in &reports {
                print!("{}", r.to_text());
            }
            let failed: usize = reports.iter().map(FixtureReport::failures).sum();
            let total: usize = reports.iter().map(|r| r.claims.len()).sum();
            println!("{} of {total} claims pass across {} fixtures", total - failed, reports.len());
            return Ok(report_status(&reports));
        }
        Command::Report { fixtures, format, parallel } => {
            let names = if fixtures.is_empty() { all_names() } else { fixtures };
            let reports = run_reports(&names, parallel)?;
            match format {
                Format::Json => print_json(&Value::Array(reports.iter().map(FixtureReport::to_json).collect())),
                Format::Text => reports.iter().for_each(|r| print!("{}", r.to_text())),
            }
            return Ok(report_status(&reports));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
