//! Run configuration: one TOML file with `kinematics`, `aero`, `dynamics`,
//! `control` and `sim` sections, environment overrides and a content hash.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aero::AeroParams;
use crate::control::ControlParams;
use crate::dynamics::DynamicsParams;
use crate::error::ConfigError;
use crate::kinematics::{DesignBounds, LinkageDesign, OptimizerSettings};
use crate::sim::SimConfig;

/// Prefix of environment overrides: `FLAPSIM__SIM__DT=1e-3` sets `sim.dt`.
pub const ENV_PREFIX: &str = "FLAPSIM__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicsConfig {
    /// Initial design for the optimizer and the drive used by simulations.
    pub design: LinkageDesign,
    pub bounds: DesignBounds,
    pub optimizer: OptimizerSettings,
    pub r2_shoulder_min: f64,
    pub r2_elbow_min: f64,
    /// Largest accepted elbow angle, degrees.
    pub theta_e_max_deg: f64,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self {
            design: LinkageDesign::default(),
            bounds: DesignBounds::default(),
            optimizer: OptimizerSettings::default(),
            r2_shoulder_min: 0.99,
            r2_elbow_min: 0.90,
            theta_e_max_deg: 180.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub kinematics: KinematicsConfig,
    pub aero: AeroParams,
    pub dynamics: DynamicsParams,
    pub control: ControlParams,
    pub sim: SimConfig,
}

impl Config {
    /// Parses TOML text, applies overrides and validates the result.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| located(text, e.message(), e.span()))?;
        for (key, value) in overrides {
            set_key(&mut table, key, value)?;
        }
        // missing keys at any depth keep their defaults
        let mut merged = match toml::Value::try_from(Config::default()) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("config serializes to a table"),
        };
        merge(&mut merged, table);
        let cfg = Config::deserialize(toml::Value::Table(merged)).map_err(|e| {
            let msg = e.message();
            // re-parse the original text to recover a line when the error is in it
            match toml::from_str::<Config>(text) {
                Err(orig) if orig.message() == msg => located(text, msg, orig.span()),
                _ => locate_named_key(text, msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a file (empty path content means all defaults) and applies
    /// `FLAPSIM__*` variables from `env`.
    pub fn load(
        path: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        let overrides = env_overrides(env);
        Self::from_toml_str(&text, &overrides)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let k = &self.kinematics;
        k.design
            .validate()
            .map_err(|e| ConfigError::at_key("kinematics.design", e.to_string()))?;
        k.bounds
            .validate()
            .map_err(|e| ConfigError::at_key("kinematics.bounds", e.to_string()))?;
        if k.optimizer.grid_points < 64 {
            return Err(ConfigError::at_key(
                "kinematics.optimizer.grid_points",
                "needs at least 64 phase samples",
            ));
        }
        crate::aero::AeroModel::new(&self.aero)
            .map_err(|e| ConfigError::at_key("aero", e.to_string()))?;
        self.dynamics
            .validate()
            .map_err(|e| ConfigError::at_key("dynamics", e.to_string()))?;
        if let Some(p) = self.control.observer_poles.iter().find(|p| !(**p < 0.0)) {
            return Err(ConfigError::at_key(
                "control.observer_poles",
                format!("pole {p} is not stable"),
            ));
        }
        let c = &self.control;
        if !(c.gain_inflation > 0.0 && c.motor_limit > 0.0 && c.max_tilt > 0.0 && c.max_tilt < 1.5)
        {
            return Err(ConfigError::at_key(
                "control",
                "gain_inflation and motor_limit must be positive, max_tilt in (0, 1.5) rad",
            ));
        }
        let weight = self.dynamics.total_mass() * self.dynamics.guard.gravity;
        if !(6.0 * c.motor_limit > weight) {
            return Err(ConfigError::at_key(
                "control.motor_limit",
                format!(
                    "six motors at {} N cannot carry the {weight:.4} N system weight",
                    c.motor_limit
                ),
            ));
        }
        self.sim
            .validate(self.dynamics.aerobat.flapping_frequency)
            .map_err(|e| ConfigError::at_key("sim", e.to_string()))
    }

    /// Canonical TOML of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Dotted-key overrides from `FLAPSIM__SECTION__KEY=value` variables; others are ignored.
pub fn env_overrides(env: impl IntoIterator<Item = (String, String)>) -> Vec<(String, String)> {
    env.into_iter()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            Some((
                rest.split("__")
                    .map(str::to_ascii_lowercase)
                    .collect::<Vec<_>>()
                    .join("."),
                v,
            ))
        })
        .collect()
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Finds the first `` `name` `` quoted in `message` as a key in `text`.
fn locate_named_key(text: &str, message: &str) -> ConfigError {
    let name = message.split('`').nth(1).unwrap_or("");
    let offset = (!name.is_empty())
        .then(|| {
            let mut pos = 0;
            text.lines().find_map(|l| {
                let here = pos;
                pos += l.len() + 1;
                let t = l.trim_start();
                let rest = t.strip_prefix(name)?;
                rest.trim_start()
                    .starts_with('=')
                    .then(|| here + (l.len() - t.len()))
            })
        })
        .flatten();
    match offset {
        Some(o) => located(text, message, Some(o..o + name.len())),
        None => ConfigError::new(format!("override: {}", message.trim())),
    }
}

fn located(text: &str, message: &str, span: Option<std::ops::Range<usize>>) -> ConfigError {
    let Some(span) = span else {
        return ConfigError::new(message.trim().to_string());
    };
    let start = span.start.min(text.len());
    let line_no = text[..start].matches('\n').count() + 1;
    let mut section = String::new();
    for l in text[..start].lines() {
        let t = l.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    let line = text.lines().nth(line_no - 1).unwrap_or("");
    let key = line
        .split_once('=')
        .map(|(k, _)| k.trim().to_string())
        .filter(|k| !k.is_empty());
    let key = match key {
        Some(k) if section.is_empty() => Some(k),
        Some(k) => Some(format!("{section}.{k}")),
        None if !section.is_empty() => Some(section),
        None => None,
    };
    let where_ = match &key {
        Some(k) => format!("line {line_no}, key {k}"),
        None => format!("line {line_no}"),
    };
    ConfigError {
        key,
        line: Some(line_no),
        message: format!("{where_}: {}", message.trim()),
    }
}

fn set_key(table: &mut toml::Table, dotted: &str, raw: &str) -> Result<(), ConfigError> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = dotted.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::at_key(dotted, format!("'{p}' is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::from_toml_str("", &[]).unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = Config::default();
        let back = Config::from_toml_str(&c.to_toml(), &[]).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn unknown_key_is_located() {
        let text = "[sim]\ndt = 1e-4\n\n[control]\nposition_kp = 4.0\nbogus = 1\n";
        let e = Config::from_toml_str(text, &[]).unwrap_err();
        assert_eq!(e.line, Some(6));
        assert_eq!(e.key.as_deref(), Some("control.bogus"));
    }

    #[test]
    fn wrong_type_is_located() {
        let e = Config::from_toml_str("[sim]\nduration = \"long\"\n", &[]).unwrap_err();
        assert_eq!(e.line, Some(2));
        assert_eq!(e.key.as_deref(), Some("sim.duration"));
    }

    #[test]
    fn env_overrides_apply_with_toml_types() {
        let env = vec![
            ("FLAPSIM__SIM__SEED".to_string(), "42".to_string()),
            (
                "FLAPSIM__SIM__SCENARIO".to_string(),
                "aero-step".to_string(),
            ),
            (
                "FLAPSIM__CONTROL__OBSERVER_POLES".to_string(),
                "[-20.0, -20.0, -20.0]".to_string(),
            ),
            ("UNRELATED".to_string(), "x".to_string()),
        ];
        let c = Config::load(None, env).unwrap();
        assert_eq!(c.sim.seed, 42);
        assert_eq!(c.sim.scenario, crate::sim::Scenario::AeroStep);
        assert_eq!(c.control.observer_poles, [-20.0; 3]);
        assert_ne!(c.hash(), Config::default().hash());
    }

    #[test]
    fn partial_nested_tables_keep_their_defaults() {
        let text = "[kinematics.bounds.upper.coupler_lengths]\nshoulder_coupler = 0.05\n";
        let c = Config::from_toml_str(text, &[]).unwrap();
        let d = DesignBounds::default();
        assert_eq!(
            c.kinematics.bounds.upper.coupler_lengths.shoulder_coupler,
            0.05
        );
        assert_eq!(
            c.kinematics.bounds.upper.coupler_lengths.drive_link,
            d.upper.coupler_lengths.drive_link
        );
        assert_eq!(c.kinematics.bounds.lower, d.lower);
    }

    #[test]
    fn unknown_nested_key_is_located() {
        let text =
            "[kinematics.bounds.upper.coupler_lengths]\nshoulder_coupler = 0.05\nbogus = 1\n";
        let e = Config::from_toml_str(text, &[]).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert_eq!(
            e.key.as_deref(),
            Some("kinematics.bounds.upper.coupler_lengths.bogus")
        );
    }

    #[test]
    fn weak_motors_are_rejected() {
        let e = Config::from_toml_str("[control]\nmotor_limit = 0.1\n", &[]).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("control.motor_limit"));
    }

    #[test]
    fn resolution_guard_applies() {
        let e = Config::from_toml_str("[sim]\ndt = 0.01\n", &[]).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("sim"));
    }
}
