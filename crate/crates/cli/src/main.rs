use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use two_ray::blowup::ideal_coordinates;
use two_ray::chamber::{endpoint_classify, ray_scan};
use two_ray::corpus::{Corpus, FamilyRecord};
use two_ray::format::{pure_power_report, FindingKind};
use two_ray::game::{trace_link, Level};
use two_ray::polyring::{Budget, DegreeMatrix};
use two_ray::verify::verify_tables;

/// Two-ray games for index-2 codimension-4 Fano 3-folds.
#[derive(Parser)]
#[command(name = "two-ray", version)]
struct Cli {
    /// Family file or directory overriding the embedded corpus by id.
    #[arg(long, global = true, value_name = "PATH")]
    tables: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the table cells and report differences.
    Verify {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
    },
    /// Run the two-ray game of one family.
    Trace {
        id: String,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
    },
    /// Endpoint class of the toric game.
    Classify { id: String },
    /// Weight configuration of the Tom matrix and the pure powers it forces.
    CheckFormat { id: String },
}

enum Failure {
    Usage(String),
    Compute(String),
}

fn level(n: u8) -> Level {
    if n == 1 {
        Level::One
    } else {
        Level::Two
    }
}

fn lookup<'a>(corpus: &'a Corpus, id: &str) -> Result<&'a FamilyRecord, Failure> {
    corpus.record(id).ok_or_else(|| Failure::Usage(format!("unknown family id {id}")))
}

fn compute<T>(r: two_ray::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Compute(e.to_string()))
}

fn emit(json: bool, v: Value, text: String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&v).expect("values serialize"));
    } else {
        print!("{text}");
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let corpus = Corpus::load(cli.tables.as_deref()).map_err(|e| Failure::Usage(e.to_string()))?;
    let budget = Budget::from_env().limit();
    match cli.command {
        Command::Verify { level: n } => {
            let report = verify_tables(&corpus, level(n), budget);
            emit(cli.json, report.to_json(), report.to_string());
            Ok(report.exit_code() as u8)
        }
        Command::Trace { id, level: n } => {
            let rec = lookup(&corpus, &id)?;
            let t = compute(trace_link(rec, level(n), budget))?;
            emit(cli.json, t.to_json(), t.to_string());
            Ok(0)
        }
        Command::Classify { id } => {
            let rec = lookup(&corpus, &id)?;
            let family = compute(rec.family())?;
            let g = family.grading.as_ref().ok_or_else(|| Failure::Compute(format!("{} has no grading", rec.id)))?;
            let class = endpoint_classify(&compute(ray_scan(g))?);
            emit(cli.json, json!({"id": rec.id, "class": class.to_string()}), format!("{} {class}\n", rec.id));
            Ok(0)
        }
        Command::CheckFormat { id } => {
            let rec = lookup(&corpus, &id)?;
            let family = compute(rec.family())?;
            let tom = rec.tom.as_ref().ok_or_else(|| Failure::Compute(format!("{} has no Tom record", rec.id)))?;
            let deg = degree_matrix(&tom.degrees).map_err(Failure::Compute)?;
            let ideal: Vec<(String, i64)> = ideal_coordinates(&family)
                .into_iter()
                .map(|n| {
                    let w = family.weight_of(&n).unwrap_or(0);
                    (n, w)
                })
                .collect();
            let report = compute(pure_power_report(&deg, tom.index, &ideal))?;
            let findings: Vec<Value> = report
                .findings
                .iter()
                .map(|f| json!({"variables": f.variables, "kind": kind(f.kind), "pfaffian": f.pfaffian, "certified": f.certified}))
                .collect();
            let mut text = format!("{} Tom_{} configuration {}\n", rec.id, tom.index, report.configuration);
            for f in &report.findings {
                let mark = if f.certified { "certified" } else { "not located" };
                text += &format!("  {} {} in Pf_{} ({mark})\n", kind(f.kind), f.variables.join("*"), f.pfaffian);
            }
            let label = format!("{:?}", report.configuration.label).to_uppercase();
            emit(
                cli.json,
                json!({"id": rec.id, "tom": tom.index, "configuration": label, "pivot": report.configuration.pivot, "findings": findings}),
                text,
            );
            Ok(0)
        }
    }
}

fn kind(k: FindingKind) -> &'static str {
    match k {
        FindingKind::Square => "square",
        FindingKind::Product => "product",
        FindingKind::QuadraticForm => "quadratic form",
    }
}

fn degree_matrix(rows: &[Vec<Option<i64>>]) -> Result<DegreeMatrix, String> {
    let mut m: DegreeMatrix = [[None; 5]; 5];
    if rows.len() != 5 || rows.iter().any(|r| r.len() != 5) {
        return Err("Tom degree matrix must be 5x5".into());
    }
    for (i, r) in rows.iter().enumerate() {
        m[i].copy_from_slice(r);
    }
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("two-ray: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("two-ray: {m}");
            ExitCode::from(3)
        }
    }
}
