//! `cechblow`: batch front end for the solvers and the certificate checker.

mod instance;
mod report;
mod selftest;
mod solve;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use instance::{InputError, Kind, Overrides};
use report::Report;
use solve::{INVALID, NEGATIVE, OK};

#[derive(Parser)]
#[command(name = "cechblow", version, about = "Exact Čech cohomology after blowing up real planar charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve any instance, dispatching on its `kind`.
    Run(SolveArgs),
    /// First Cousin problem: glue local principal parts (kind `cousin`).
    SolveCousin(SolveArgs),
    /// Split a 1-cocycle after blowing up (kind `cech_solve`).
    SolveCocycle(SolveArgs),
    /// Blow up until a curve has simple normal crossings (kind `snc`).
    ResolveSnc(SolveArgs),
    /// Blow up until polynomials are ordered by division (kind `order_by_division`).
    OrderDivision(SolveArgs),
    /// Minimal trivializing tower of ξ(k,l) (kind `xi_experiment`).
    Xi(SolveArgs),
    /// Compare two sections on a common refinement (kind `limit_eq`).
    LimitEq(SolveArgs),
    /// Replay every certificate embedded in a report.
    Verify(VerifyArgs),
    /// Seeded randomized checks of the core identities.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file; repeat to run several, with `--out` naming a directory.
    #[arg(long = "instance", required = true)]
    instances: Vec<PathBuf>,
    /// Report file (or directory for several instances); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    deg: Option<u32>,
    #[arg(long)]
    power: Option<u32>,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record wall-clock time; the report is then no longer reproducible byte for byte.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report written by one of the solving subcommands.
    #[arg(long, alias = "instance")]
    report: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per check.
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Run(a) => solve_all("run", None, &a),
        Command::SolveCousin(a) => solve_all("solve-cousin", Some(Kind::Cousin), &a),
        Command::SolveCocycle(a) => solve_all("solve-cocycle", Some(Kind::CechSolve), &a),
        Command::ResolveSnc(a) => solve_all("resolve-snc", Some(Kind::Snc), &a),
        Command::OrderDivision(a) => solve_all("order-division", Some(Kind::OrderByDivision), &a),
        Command::Xi(a) => solve_all("xi", Some(Kind::XiExperiment), &a),
        Command::LimitEq(a) => solve_all("limit-eq", Some(Kind::LimitEq), &a),
        Command::Verify(a) => verify_report(&a),
        Command::Selftest(a) => selftest(&a),
    };
    match r {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INVALID as u8)
        }
    }
}

fn solve_one(command: &str, expect: Option<Kind>, path: &Path, a: &SolveArgs) -> Report {
    let ov = Overrides { deg: a.deg, power: a.power, depth: a.max_depth, seed: a.seed };
    let start = Instant::now();
    let parsed = instance::read(path, &ov).and_then(|i| match expect {
        Some(k) if k != i.kind => {
            Err(InputError { pointer: "/kind".into(), message: format!("{command} expects kind `{}`, got `{}`", k.name(), i.kind.name()) })
        }
        _ => Ok(i),
    });
    let mut r = match parsed {
        Ok(inst) => Report::new(command, inst.echo.clone(), solve::run(&inst)),
        Err(e) => Report::input_error(command, &e),
    };
    if a.timing {
        r.set_timing(start.elapsed());
    }
    r
}

fn report_path(out: &Path, instance: &Path) -> PathBuf {
    let stem = instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into());
    out.join(format!("{stem}.report.json"))
}

fn combine(statuses: impl IntoIterator<Item = i32>) -> i32 {
    statuses.into_iter().fold(OK, |acc, s| match (acc, s) {
        (INVALID, _) | (_, INVALID) => INVALID,
        (NEGATIVE, _) | (_, NEGATIVE) => NEGATIVE,
        _ => OK,
    })
}

fn solve_all(command: &str, expect: Option<Kind>, a: &SolveArgs) -> Result<i32> {
    if a.instances.len() == 1 {
        let path = &a.instances[0];
        let r = solve_one(command, expect, path, a);
        eprintln!("{}: {}", path.display(), r.headline());
        match &a.out {
            Some(out) => r.write_atomic(out)?,
            None => println!("{}", r.to_json()),
        }
        return Ok(r.status);
    }
    let Some(dir) = &a.out else { bail!("several instances need --out naming a directory") };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let next = AtomicUsize::new(0);
    let statuses = Mutex::new(vec![OK; a.instances.len()]);
    let errors = Mutex::new(vec![]);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.clamp(1, a.instances.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = a.instances.get(i) else { break };
                let r = solve_one(command, expect, path, a);
                eprintln!("{}: {}", path.display(), r.headline());
                if let Err(e) = r.write_atomic(&report_path(dir, path)) {
                    errors.lock().expect("no poisoning").push(format!("{e:#}"));
                }
                statuses.lock().expect("no poisoning")[i] = r.status;
            });
        }
    });
    let errors = errors.into_inner().expect("no poisoning");
    if let Some(e) = errors.first() {
        bail!("{e}");
    }
    Ok(combine(statuses.into_inner().expect("no poisoning")))
}

fn verify_report(a: &VerifyArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.report.display()))?;
    if v.get("schema").and_then(Value::as_str) != Some(report::SCHEMA) {
        bail!("{} is not a {} report", a.report.display(), report::SCHEMA);
    }
    let t = verify::verify(&v);
    let status = if t.failures.is_empty() { OK } else { INVALID };
    let summary = format!("{} regularity and {} zero-set certificates, {} failed", t.regularity, t.zero_sets, t.failures.len());
    eprintln!("{}: {summary}", a.report.display());
    for f in &t.failures {
        eprintln!("  {f}");
    }
    let outcome = if status == OK { "Verified" } else { "Rejected" };
    let r =
        Report::new("verify", json!({ "report": a.report }), solve::Outcome { status, outcome: outcome.into(), summary, result: json!(t) });
    match &a.out {
        Some(out) => r.write_atomic(out)?,
        None => println!("{}", r.to_json()),
    }
    Ok(status)
}

fn selftest(a: &SelftestArgs) -> Result<i32> {
    let start = Instant::now();
    let checks = selftest::run(a.seed, a.rounds);
    let failed: usize = checks.iter().map(|c| c.failed).sum();
    let passed: usize = checks.iter().map(|c| c.passed).sum();
    for c in &checks {
        eprintln!("{:<40} {:>4} passed {:>4} failed", c.name, c.passed, c.failed);
    }
    let status = if failed == 0 { OK } else { NEGATIVE };
    let outcome = if failed == 0 { "Passed" } else { "Failed" };
    let summary = format!("{passed} trials passed, {failed} failed");
    let mut r = Report::new(
        "selftest",
        json!({ "seed": a.seed, "rounds": a.rounds }),
        solve::Outcome { status, outcome: outcome.into(), summary, result: json!({ "checks": checks }) },
    );
    if a.timing {
        r.set_timing(start.elapsed());
    }
    eprintln!("selftest: {}", r.headline());
    match &a.out {
        Some(out) => r.write_atomic(out)?,
        None => println!("{}", r.to_json()),
    }
    Ok(status)
}
