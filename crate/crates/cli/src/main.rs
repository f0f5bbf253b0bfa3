//! `qphase`: run analysis scenarios and the built-in verification suites.

mod scenario;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use qphase_core::verify::{run_suite_with, Suite};
use serde::Serialize;

use scenario::{Overrides, Scenario};
use tasks::{Context, TaskReport};

/// Version of the summary document written by `run`.
const SCHEMA_VERSION: u32 = 1;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qphase", version, about = "Quantum potential, Fermi sets and symplectic capacities of sampled states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a scenario file and write artifacts plus summary.json.
    Run {
        scenario: PathBuf,
        /// Grid as JSON or `N:LO:HI[:walls]`.
        #[arg(long)]
        grid_override: Option<String>,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long)]
        mass: Option<f64>,
        /// Oscillator frequency of the state.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite: oscillator, well, dynamics, symplectic or all.
    Verify { suite: String },
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    scenario: PathBuf,
    config_hash: String,
    config: Scenario,
    overrides: Vec<String>,
    tasks: Vec<TaskReport>,
    all_checks_pass: bool,
    seconds: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // clap exits with 2 on usage errors
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, grid_override, hbar, mass, omega, seed, out } => {
            let ov = Overrides { grid: grid_override, hbar, mass, omega, seed, out };
            run(&scenario, &ov)
        }
        Command::Verify { suite } => verify(&suite),
    }
}

fn run(path: &Path, ov: &Overrides) -> ExitCode {
    let mut sc = match scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let overrides = match ov.apply(&mut sc) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let prepared = match scenario::prepare(&sc) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match execute(path, &sc, overrides, &prepared) {
        Ok(summary) if summary.all_checks_pass => ExitCode::SUCCESS,
        Ok(summary) => {
            for t in summary.tasks.iter().filter(|t| !t.pass()) {
                match &t.error {
                    Some(e) => eprintln!("task {} `{}` failed: {e}", t.index, t.task),
                    None => {
                        for c in t.checks.iter().filter(|c| !c.pass) {
                            eprintln!("task {} `{}`: check `{}` failed (value {:?})", t.index, t.task, c.check.key, c.value);
                        }
                    }
                }
            }
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}

fn execute(path: &Path, sc: &Scenario, overrides: Vec<String>, p: &scenario::Prepared) -> anyhow::Result<Summary> {
    let start = Instant::now();
    std::fs::create_dir_all(&sc.output_dir)
        .with_context(|| format!("creating output directory {}", sc.output_dir.display()))?;
    let ctx = Context { spec: &p.spec, wf: &p.wf, potential: p.potential, seed: sc.seed, out_dir: &sc.output_dir };
    log::info!("{} task(s) on a {:?} grid", sc.analysis.len(), p.grid.n_points());
    let mut reports = Vec::new();
    for (i, task) in sc.analysis.iter().enumerate() {
        let r = tasks::run_task(i, task, &ctx);
        log::info!("task {i} `{}`: {} in {:.2} s", r.task, if r.pass() { "ok" } else { "FAILED" }, r.seconds);
        let stop = r.error.is_some();
        reports.push(r);
        if stop {
            break;
        }
    }
    let all = reports.len() == sc.analysis.len() && reports.iter().all(TaskReport::pass);
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        scenario: path.to_path_buf(),
        config_hash: qphase_core::io::config_hash(sc)?,
        config: sc.clone(),
        overrides,
        tasks: reports,
        all_checks_pass: all,
        seconds: start.elapsed().as_secs_f64(),
    };
    let out = sc.output_dir.join("summary.json");
    std::fs::write(&out, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", out.display()))?;
    log::info!("summary written to {}", out.display());
    Ok(summary)
}

fn verify(name: &str) -> ExitCode {
    let suite: Suite = match name.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = run_suite_with(suite, |v| eprintln!("{v}"));
    match serde_json::to_string_pretty(&report) {
        Ok(s) => println!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CHECK_FAILED);
        }
    }
    if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
