//! Run directory layout: resolved config snapshot, CSV logs, metrics JSON and
//! a manifest written last.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use flapsim_core::config::Config;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one invocation; `config_snapshot` alone reproduces the run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config_path: Option<PathBuf>,
    pub config_hash: String,
    pub config_snapshot: String,
    pub overrides: Vec<(String, String)>,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub exit_status: i32,
    pub message: String,
    pub wall_time_s: f64,
}

/// Header line written at the top of every CSV.
pub fn provenance(cfg: &Config) -> String {
    format!("flapsim {VERSION} config {}", cfg.hash())
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    write_json(&dir.join("manifest.json"), manifest)
}
