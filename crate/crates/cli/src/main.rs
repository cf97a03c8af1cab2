//! `critcyc` command-line runner: one experiment per invocation, writing
//! `result.csv`, `summary.json` and `manifest.json` to the output directory.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use config::{Command, Failure};

#[derive(Debug, Parser)]
#[command(name = "critcyc", version, about = "Critical cyclicity experiments on the unit ball of C^2")]
struct Cli {
    command: Command,
    /// JSON config: {"params": {...}, "seed": u64, "out": dir, "resolution": n}.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `critcyc-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Main resolution knob of the command (depth, degree, nodes, budget, ...).
    #[arg(long)]
    resolution: Option<u64>,
    /// Parameter override, `key=value` with a JSON or bare-string value.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let cfg = match config::resolve(cli.command, cli.config.as_deref(), cli.seed, cli.out, cli.resolution, &cli.params) {
        Ok(c) => c,
        Err(f) => return report(&f, None),
    };
    let out = match commands::run(&cfg) {
        Ok(o) => o,
        Err(f) => return report(&f, Some(&cfg.out)),
    };
    let summary = json!({
        "command": cfg.command.name(),
        "provenance": {
            "seed": cfg.seed,
            "surrogate": out.surrogate,
            "truncation": out.truncation,
            "params": cfg.params,
        },
        "result": out.result,
    });
    let manifest = json!({
        "command": cfg.command.name(),
        "config": cfg.echo(),
        "versions": {
            "critcyc": critcyc::VERSION,
            "critcyc-cli": env!("CARGO_PKG_VERSION"),
        },
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    let csv = format!("# {}\n{}", cfg.provenance_line(out.truncation.as_deref()), out.csv);
    if let Err(f) = config::write_outputs(&cfg.out, &csv, &summary, &manifest) {
        return report(&f, None);
    }
    match out.unstable {
        Some(msg) => report(&Failure::Numerical(msg), Some(&cfg.out)),
        None => ExitCode::SUCCESS,
    }
}

fn report(f: &Failure, out: Option<&PathBuf>) -> ExitCode {
    let body = serde_json::to_string(&f.to_json()).unwrap_or_default();
    println!("{body}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{body}\n"));
        }
    }
    ExitCode::from(f.exit_code())
}
