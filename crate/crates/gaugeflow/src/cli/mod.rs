//! Configuration-driven experiment runner: TOML configs in, CSV reports and
//! artifacts out. Exit codes: 0 all checks pass, 1 a check failed or a run
//! errored, 2 configuration error.

pub mod config;
pub mod report;
pub mod runner;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{config_hash, ExperimentConfig, ExperimentKind, SweepGrid};
pub use report::{CheckRow, RunReport};
pub use runner::{execute, RunOutcome};

use crate::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gaugeflow",
    version,
    about = "Seeded geometry experiments with pass/fail CSV reports"
)]
struct Cli {
    /// Output directory root (overrides output_dir from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a TOML config.
    Run { config: PathBuf },
    /// Run a config across a parameter grid, merging reports in grid order.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
    },
    /// One-off regularized trace check without a config file.
    Trace {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        b: f64,
        /// Partial-sum length.
        #[arg(long = "N", default_value_t = 10_000)]
        n: usize,
    },
}

/// CLI entry point; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return 2;
    }
    let outcome = match cli.cmd {
        Cmd::Run { config } => cmd_run(&config, cli.out.as_deref()),
        Cmd::Sweep { config, grid } => cmd_sweep(&config, &grid, cli.out.as_deref()),
        Cmd::Trace { lambda, b, n } => cmd_trace(lambda, b, n, cli.out.as_deref()),
    };
    match outcome {
        Ok(all_pass) => {
            if all_pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::OutOfRange { .. } => 2,
        _ => 1,
    }
}

/// GAUGEFLOW_WORKERS bounds the worker pool used by suite internals and
/// sweep fan-out. Unset means the rayon default. Best effort: if a global
/// pool already exists the existing size wins.
fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var("GAUGEFLOW_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            Error::Config(format!(
                "GAUGEFLOW_WORKERS must be a positive integer, got {raw:?}"
            ))
        })?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read_config(path: &Path) -> Result<(ExperimentConfig, String)> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
    let config = ExperimentConfig::from_toml(&text)?;
    Ok((config, config_hash(&bytes)))
}

fn output_root(config: &ExperimentConfig, out_flag: Option<&Path>) -> PathBuf {
    out_flag
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_outcome(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let report_path = dir.join("report.csv");
    fs::write(&report_path, outcome.report.to_csv())
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", report_path.display())))?;
    for (name, contents) in &outcome.artifacts {
        let p = dir.join(name);
        fs::write(&p, contents)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn print_report(report: &RunReport) {
    for c in &report.checks {
        println!(
            "{} {}  value={:.6e} bound={:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!(
        "{} {} ({passed}/{} checks, {} ms)",
        if report.all_pass() { "PASS" } else { "FAIL" },
        report.experiment,
        report.checks.len(),
        report.wall_ms
    );
}

fn cmd_run(config_path: &Path, out_flag: Option<&Path>) -> Result<bool> {
    let (config, hash) = read_config(config_path)?;
    let outcome = execute(&config, &hash)?;
    let dir = output_root(&config, out_flag).join(format!("{}_{hash}", config.experiment.name()));
    write_outcome(&dir, &outcome)?;
    print_report(&outcome.report);
    println!("report: {}", dir.join("report.csv").display());
    Ok(outcome.report.all_pass())
}

fn cmd_trace(lambda: f64, b: f64, n: usize, out_flag: Option<&Path>) -> Result<bool> {
    let canonical = format!(
        "experiment = \"trace\"\nseed = 0\n\n[params]\nlambda = {lambda:.16e}\nb = {b:.16e}\nn_terms = {n}\n"
    );
    let config = ExperimentConfig::from_toml(&canonical)?;
    let hash = config_hash(canonical.as_bytes());
    let outcome = execute(&config, &hash)?;
    print!("{}", outcome.report.to_csv());
    if let Some(out) = out_flag {
        let dir = out.join(format!("trace_{hash}"));
        write_outcome(&dir, &outcome)?;
        println!("report: {}", dir.join("report.csv").display());
    }
    Ok(outcome.report.all_pass())
}

fn cmd_sweep(config_path: &Path, grid_path: &Path, out_flag: Option<&Path>) -> Result<bool> {
    let (base, base_hash) = read_config(config_path)?;
    let grid_bytes = fs::read(grid_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", grid_path.display())))?;
    let grid_text = String::from_utf8(grid_bytes)
        .map_err(|_| Error::Config(format!("{} is not UTF-8", grid_path.display())))?;
    let grid = SweepGrid::from_toml(&grid_text)?;
    let rows = grid.rows()?;

    let root = output_root(&base, out_flag).join(format!(
        "{}_sweep_{base_hash}",
        base.experiment.name()
    ));

    // Materialize every row config up front so config errors anywhere in the
    // grid surface before any run starts.
    let mut jobs = Vec::with_capacity(rows.len());
    for row in &rows {
        let config = config::apply_row(&base, row)?;
        let hash = row_hash(&base_hash, row);
        jobs.push((config, hash));
    }

    // Independent runs; a failed run is recorded and the sweep continues.
    use rayon::prelude::*;
    let results: Vec<std::result::Result<RunOutcome, Error>> = jobs
        .par_iter()
        .map(|(config, hash)| execute(config, hash))
        .collect();

    let mut summary = String::from("row,config_hash,assignments,checks_failed,checks_total,status\n");
    let mut all_pass = true;
    for (i, ((_, hash), result)) in jobs.iter().zip(&results).enumerate() {
        let assignments = describe_row(&rows[i]);
        match result {
            Ok(outcome) => {
                let dir = root.join(format!("row_{i:04}_{hash}"));
                write_outcome(&dir, outcome)?;
                let failed = outcome.report.checks.iter().filter(|c| !c.pass).count();
                let status = if outcome.report.all_pass() {
                    "pass"
                } else {
                    all_pass = false;
                    "check_fail"
                };
                summary.push_str(&format!(
                    "{i},{hash},{assignments},{failed},{},{status}\n",
                    outcome.report.checks.len()
                ));
                println!(
                    "row {i:04} [{assignments}] {}",
                    if outcome.report.all_pass() { "PASS" } else { "FAIL" }
                );
            }
            Err(e) => {
                all_pass = false;
                summary.push_str(&format!("{i},{hash},{assignments},0,0,error\n"));
                println!("row {i:04} [{assignments}] ERROR: {e}");
            }
        }
    }
    fs::create_dir_all(&root)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", root.display())))?;
    let summary_path = root.join("summary.csv");
    fs::write(&summary_path, summary)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", summary_path.display())))?;
    println!("summary: {}", summary_path.display());
    Ok(all_pass)
}

/// Deterministic per-row hash: base config hash extended with the row's
/// canonical assignment text.
fn row_hash(base_hash: &str, row: &[(String, toml::Value)]) -> String {
    config_hash(format!("{base_hash}|{}", describe_row(row)).as_bytes())
}

/// Canonical, CSV-safe rendering of one grid row's assignments.
fn describe_row(row: &[(String, toml::Value)]) -> String {
    let parts: Vec<String> = row
        .iter()
        .map(|(k, v)| format!("{k}={}", describe_value(v)))
        .collect();
    parts.join(";")
}

fn describe_value(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(f) => format!("{f:.16e}"),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::String(s) => s.clone(),
        toml::Value::Array(a) => {
            let inner: Vec<String> = a.iter().map(describe_value).collect();
            format!("[{}]", inner.join(" "))
        }
        other => format!("{other}"),
    }
}
