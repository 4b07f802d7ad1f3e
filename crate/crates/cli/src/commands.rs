//! The two batch commands. Each resolves its configuration, writes a run
//! directory and returns the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use flapsim_core::config::Config;
use flapsim_core::kinematics::{optimize_linkage, sample_targets, OptimizationReport};
use flapsim_core::sim::{run_scenario, Metrics, TrajectoryLog};
use flapsim_core::{KinematicsError, SimError};
use serde::Serialize;

use crate::output::{provenance, write_atomic, write_json, write_manifest, RunManifest, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_THRESHOLDS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    LinkageOptimize,
    Simulate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LinkageOptimize => "linkage-optimize",
            Command::Simulate => "simulate",
        }
    }
}

/// One resolved run: config text plus ordered dotted-key overrides.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub config_text: String,
    pub overrides: Vec<(String, String)>,
    pub out: PathBuf,
}

struct Outcome {
    code: i32,
    message: String,
}

impl Outcome {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

pub fn sim_exit_code(e: &SimError) -> i32 {
    match e {
        SimError::NumericalBlowup { .. }
        | SimError::Aero(_)
        | SimError::Dynamics(_)
        | SimError::Control(_) => EXIT_NUMERICAL,
        SimError::InvalidConfig(_) => EXIT_CONFIG,
        SimError::Kinematics(k) => kinematics_exit_code(k),
        SimError::Io(_) | SimError::Csv(_) => EXIT_IO,
    }
}

pub fn kinematics_exit_code(e: &KinematicsError) -> i32 {
    match e {
        KinematicsError::InvalidDesign(_) | KinematicsError::LengthMismatch { .. } => EXIT_CONFIG,
        _ => EXIT_INFEASIBLE,
    }
}

/// Runs one request end to end; config errors leave no run directory.
pub fn execute(req: &RunRequest) -> i32 {
    let start = Instant::now();
    let cfg = match Config::from_toml_str(&req.config_text, &req.overrides) {
        Ok(c) => c,
        Err(e) => {
            let origin = req
                .config_path
                .as_ref()
                .map(|p| format!("{}: ", p.display()))
                .unwrap_or_default();
            eprintln!("error: {origin}{e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = fs::create_dir_all(&req.out) {
        eprintln!("error: cannot create {}: {e}", req.out.display());
        return EXIT_IO;
    }
    let mut files = vec!["config.toml".to_string()];
    let outcome = match write_atomic(&req.out.join("config.toml"), cfg.to_toml().as_bytes()) {
        Err(e) => Outcome::new(EXIT_IO, format!("cannot write config snapshot: {e}")),
        Ok(()) => match req.command {
            Command::Simulate => simulate(&cfg, &req.out, &mut files),
            Command::LinkageOptimize => linkage_optimize(&cfg, &req.out, &mut files),
        }
        .unwrap_or_else(|e| Outcome::new(EXIT_IO, format!("cannot write outputs: {e}"))),
    };
    let manifest = RunManifest {
        command: req.command.name().into(),
        version: VERSION,
        config_path: req.config_path.clone(),
        config_hash: cfg.hash(),
        config_snapshot: cfg.to_toml(),
        overrides: req.overrides.clone(),
        output_dir: req.out.clone(),
        files,
        exit_status: outcome.code,
        message: outcome.message.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = write_manifest(&req.out, &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_IO;
    }
    let line = format!(
        "{}: {} ({})",
        req.command.name(),
        outcome.message,
        req.out.display()
    );
    if outcome.code == EXIT_OK {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    outcome.code
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    version: &'static str,
    config_hash: String,
    #[serde(flatten)]
    metrics: &'a Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

fn simulate(cfg: &Config, dir: &Path, files: &mut Vec<String>) -> std::io::Result<Outcome> {
    let out = match run_scenario(cfg) {
        Ok(o) => o,
        Err(e) => return Ok(Outcome::new(sim_exit_code(&e), e.to_string())),
    };
    let header = provenance(cfg);
    for (name, log) in &out.logs {
        let file = format!("{name}.csv");
        log.save(&dir.join(&file), &header)
            .map_err(std::io::Error::other)?;
        files.push(file);
    }
    let metrics = MetricsFile {
        version: VERSION,
        config_hash: cfg.hash(),
        metrics: &out.metrics,
        failure: out.failure.as_ref().map(|e| e.to_string()),
    };
    write_json(&dir.join("metrics.json"), &metrics)?;
    files.push("metrics.json".into());

    let scenario = cfg.sim.scenario;
    Ok(match &out.failure {
        Some(e) => Outcome::new(
            sim_exit_code(e),
            format!("{scenario} aborted: {e}; partial log kept"),
        ),
        None if out.metrics.thresholds_met => {
            Outcome::new(EXIT_OK, format!("{scenario} met its thresholds"))
        }
        None => Outcome::new(EXIT_THRESHOLDS, format!("{scenario} missed its thresholds")),
    })
}

fn linkage_optimize(cfg: &Config, dir: &Path, files: &mut Vec<String>) -> std::io::Result<Outcome> {
    let k = &cfg.kinematics;
    let targets = sample_targets(k.optimizer.grid_points);
    let report = match optimize_linkage(&k.design, &targets, &k.bounds, &k.optimizer) {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::new(kinematics_exit_code(&e), e.to_string())),
    };

    write_atomic(&dir.join("report.txt"), flat_report(&report).as_bytes())?;
    files.push("report.txt".into());

    let mut traj = TrajectoryLog::new([
        "phase",
        "theta_s",
        "theta_s_target",
        "theta_e",
        "theta_e_target",
    ]);
    for row in &report.trajectory {
        traj.push(row.to_vec());
    }
    let header = provenance(cfg);
    traj.save(&dir.join("trajectory.csv"), &header)
        .map_err(std::io::Error::other)?;
    files.push("trajectory.csv".into());

    let mut hist = TrajectoryLog::new(["iteration", "best_objective"]);
    for (i, v) in report.history.iter().enumerate() {
        hist.push(vec![i as f64, *v]);
    }
    hist.save(&dir.join("convergence.csv"), &header)
        .map_err(std::io::Error::other)?;
    files.push("convergence.csv".into());

    // full config with the optimized design, ready to feed back to `simulate`
    let mut tuned = cfg.clone();
    tuned.kinematics.design = report.optimized_design;
    write_atomic(&dir.join("optimized.toml"), tuned.to_toml().as_bytes())?;
    files.push("optimized.toml".into());

    let theta_e_max = report.theta_e_range.1.to_degrees();
    let mut misses = Vec::new();
    if report.r2_shoulder < k.r2_shoulder_min {
        misses.push(format!(
            "r2_shoulder {:.4} < {}",
            report.r2_shoulder, k.r2_shoulder_min
        ));
    }
    if report.r2_elbow < k.r2_elbow_min {
        misses.push(format!(
            "r2_elbow {:.4} < {}",
            report.r2_elbow, k.r2_elbow_min
        ));
    }
    if theta_e_max > k.theta_e_max_deg {
        misses.push(format!(
            "theta_e max {theta_e_max:.1} deg > {}",
            k.theta_e_max_deg
        ));
    }
    if !report.bend_pass {
        misses.push("joint bend limits exceeded".into());
    }
    Ok(if misses.is_empty() {
        Outcome::new(
            EXIT_OK,
            format!(
                "r2_shoulder {:.4}, r2_elbow {:.4}, joint limits met",
                report.r2_shoulder, report.r2_elbow
            ),
        )
    } else {
        Outcome::new(EXIT_THRESHOLDS, misses.join("; "))
    })
}

/// `key = value` lines, design parameters under dotted keys.
fn flat_report(r: &OptimizationReport) -> String {
    let mut s = String::new();
    let deg = |v: f64| v.to_degrees();
    let _ = writeln!(s, "r2_shoulder = {}", r.r2_shoulder);
    let _ = writeln!(s, "r2_elbow = {}", r.r2_elbow);
    let _ = writeln!(s, "theta_s_min_deg = {}", deg(r.theta_s_range.0));
    let _ = writeln!(s, "theta_s_max_deg = {}", deg(r.theta_s_range.1));
    let _ = writeln!(s, "theta_e_min_deg = {}", deg(r.theta_e_range.0));
    let _ = writeln!(s, "theta_e_max_deg = {}", deg(r.theta_e_range.1));
    for (j, b) in r.max_bend_angles.iter().enumerate() {
        let _ = writeln!(s, "max_bend_j{}_deg = {}", j + 1, deg(*b));
    }
    let _ = writeln!(s, "bend_pass = {}", r.bend_pass);
    let _ = writeln!(s, "objective = {}", r.objective);
    let _ = writeln!(s, "iterations = {}", r.iterations);
    let _ = writeln!(s, "evaluations = {}", r.evaluations);
    let _ = writeln!(s, "converged = {}", r.converged);
    let design = serde_json::to_value(r.optimized_design).expect("design serializes");
    flatten("design", &design, &mut s);
    s
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut String) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        other => {
            let _ = writeln!(out, "{prefix} = {other}");
        }
    }
}
