//! `pilotwave` command-line runner.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.

mod config;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Map, Value};

use config::{parse_override, parse_text, ConfigError, RunConfig, Scenario};
use scenarios::{Report, RunError};

#[derive(Parser, Debug)]
#[command(name = "pilotwave", version, about = "Bohmian trajectories and weak-measurement runs for entangled photon pairs")]
struct Args {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path prefix; files are `<prefix>_<name>.csv`.
    #[arg(long, default_value = "pilotwave")]
    out: String,
    #[arg(long)]
    seed: Option<u64>,
    /// trajectories, joint-density, marginals, velocity-profile, weak-sim, equivariance or budget.
    #[arg(long)]
    scenario: Option<String>,
}

fn resolve(args: &Args) -> Result<RunConfig, ConfigError> {
    let mut pairs = Vec::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            field: "--config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        pairs.extend(parse_text(&text)?);
    }
    for s in &args.set {
        pairs.push(parse_override(s)?);
    }
    let mut cfg = RunConfig::from_pairs(&pairs)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(s) = &args.scenario {
        cfg.scenario = Scenario::parse(s)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_metadata(prefix: &str, cfg: Option<&RunConfig>, status: &str, errors: &[String], report: &Report, secs: f64) {
    let config: Map<String, Value> = cfg
        .map(|c| c.entries().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect())
        .unwrap_or_default();
    let meta = json!({
        "tool": "pilotwave",
        "version": env!("CARGO_PKG_VERSION"),
        "status": status,
        "scenario": cfg.map(|c| c.scenario.name()),
        "seed": cfg.map(|c| c.seed),
        "config": config,
        "wall_clock_seconds": secs,
        "incidents": {
            "node_stall": report.node_stall,
            "saturation": report.saturation,
            "out_of_range": report.out_of_range,
            "underfilled_bins": report.underfilled_bins,
        },
        "files": report.files,
        "summary": report.summary,
        "errors": errors,
    });
    let path = format!("{prefix}_meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    if let Err(e) = std::fs::write(&path, text + "\n") {
        eprintln!("error: cannot write {path}: {e}");
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    if let Some(dir) = Path::new(&args.out).parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    let mut report = Report::default();

    let cfg = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            write_metadata(&args.out, None, "invalid", &[e.to_string()], &report, start.elapsed().as_secs_f64());
            return ExitCode::from(1);
        }
    };
    let resolved = format!("{}_resolved.conf", args.out);
    if let Err(e) = std::fs::write(&resolved, cfg.to_conf()) {
        eprintln!("error: cannot write {resolved}: {e}");
        return ExitCode::from(1);
    }

    let result = scenarios::run(&cfg, &args.out, &mut report);
    let secs = start.elapsed().as_secs_f64();
    let (status, code, mut errors) = match result {
        Ok(()) if report.failures.is_empty() => ("ok", 0, Vec::new()),
        Ok(()) => ("numerical_failure", 2, Vec::new()),
        Err(RunError::Numerical(m)) => ("numerical_failure", 2, vec![m]),
        Err(RunError::Io(m)) => ("io_error", 1, vec![m]),
    };
    errors.extend(report.failures.iter().cloned());
    for e in errors.iter().take(20) {
        eprintln!("{e}");
    }
    if errors.len() > 20 {
        eprintln!("... {} more, see {}_meta.json", errors.len() - 20, args.out);
    }
    write_metadata(&args.out, Some(&cfg), status, &errors, &report, secs);
    ExitCode::from(code)
}
