//! `flapsim`: batch driver for linkage synthesis and scenario simulation.
//!
//! Exit codes: 0 success, 1 thresholds missed, 2 configuration error,
//! 3 infeasible linkage, 4 numerical failure, 5 output I/O failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flapsim_core::aero::WagnerMode;
use flapsim_core::config::{env_overrides, Config};
use flapsim_core::sim::Scenario;
use serde::Serialize;

use commands::{execute, Command, RunRequest, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "flapsim", version, about = "Guarded flapping-wing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the armwing linkage to the target gait and check hinge limits.
    LinkageOptimize {
        #[command(flatten)]
        common: Common,
    },
    /// Run one scenario and write logs, metrics and a manifest.
    Simulate {
        /// hover, wingtip-trace, aero-step, observer-demo or free-flight
        #[arg(long)]
        scenario: Option<String>,
        /// Wagner response variant: classical or paper-literal
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the fully defaulted configuration as TOML.
    Defaults,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; missing keys take their defaults
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run directory (sweeps write one subdirectory per point)
    #[arg(long, value_name = "DIR", default_value = "flapsim-out")]
    out: PathBuf,
    /// Seed for measurement noise, phase jitter and optimizer restarts
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel runs for a sweep
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Override one dotted config key, e.g. --set sim.duration=5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Sweep a key over comma-separated values; several sweeps form a grid
    #[arg(long = "sweep", value_name = "KEY=V1,V2,...")]
    sweep: Vec<String>,
}

fn split_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected KEY=VALUE, got '{s}'")),
    }
}

/// Cartesian product of the sweep axes, in command-line order.
fn grid(sweeps: &[(String, Vec<String>)]) -> Vec<Vec<(String, String)>> {
    let mut points = vec![Vec::new()];
    for (key, values) in sweeps {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Serialize)]
struct SweepEntry {
    dir: PathBuf,
    overrides: Vec<(String, String)>,
    exit_status: i32,
}

fn run(command: Command, common: Common, mut flags: Vec<(String, String)>) -> Result<i32, String> {
    let config_text = match &common.config {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?
        }
        None => String::new(),
    };
    if let Some(seed) = common.seed {
        flags.push(("sim.seed".into(), seed.to_string()));
        flags.push(("kinematics.optimizer.seed".into(), seed.to_string()));
    }
    let mut overrides = env_overrides(std::env::vars());
    for s in &common.set {
        overrides.push(split_pair(s)?);
    }
    overrides.extend(flags);

    let mut sweeps = Vec::new();
    for s in &common.sweep {
        let (k, v) = split_pair(s)?;
        let values: Vec<String> = v
            .split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect();
        if values.is_empty() {
            return Err(format!("sweep '{k}' has no values"));
        }
        sweeps.push((k, values));
    }

    let request = |out: PathBuf, extra: &[(String, String)]| RunRequest {
        command,
        config_path: common.config.clone(),
        config_text: config_text.clone(),
        overrides: overrides.iter().chain(extra).cloned().collect(),
        out,
    };
    if sweeps.is_empty() {
        return Ok(execute(&request(common.out.clone(), &[])));
    }

    let points = grid(&sweeps);
    let requests: Vec<RunRequest> = points
        .iter()
        .enumerate()
        .map(|(i, p)| request(common.out.join(format!("run-{i:03}")), p))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs as usize)
        .build()
        .map_err(|e| e.to_string())?;
    let codes: Vec<i32> = pool.install(|| {
        use rayon::prelude::*;
        requests.par_iter().map(execute).collect()
    });
    let entries: Vec<SweepEntry> = requests
        .iter()
        .zip(&points)
        .zip(&codes)
        .map(|((r, p), c)| SweepEntry {
            dir: r.out.clone(),
            overrides: p.clone(),
            exit_status: *c,
        })
        .collect();
    std::fs::create_dir_all(&common.out).map_err(|e| e.to_string())?;
    output::write_json(&common.out.join("sweep.json"), &entries).map_err(|e| e.to_string())?;
    Ok(codes.into_iter().max().unwrap_or(0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Defaults => {
            print!("{}", Config::default().to_toml());
            Ok(0)
        }
        Cmd::LinkageOptimize { common } => run(Command::LinkageOptimize, common, Vec::new()),
        Cmd::Simulate {
            scenario,
            mode,
            common,
        } => (|| {
            let mut flags = Vec::new();
            if let Some(s) = scenario {
                let s: Scenario = s.parse()?;
                flags.push(("sim.scenario".to_string(), format!("\"{s}\"")));
            }
            if let Some(m) = mode {
                m.parse::<WagnerMode>()?;
                flags.push(("aero.wagner.mode".to_string(), format!("\"{m}\"")));
            }
            run(Command::Simulate, common, flags)
        })(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
