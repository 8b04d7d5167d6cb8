//! Run configuration: a preset dumped to TOML, a config file merged on top,
//! then dotted-path `KEY=VALUE` overrides, deserialized with unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{Error, Result};
use crate::sweep::{preset, Axis, FixedParams, Metric, Preset, QuadConfig, SweepKind, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// Everything a subcommand needs. Lengths are in mm (slit half-width in nm),
/// frequencies in THz and tilt in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: SweepKind,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default)]
    pub quadrature: QuadConfig,
    #[serde(default)]
    pub axis: Vec<Axis>,
}

impl RunConfig {
    pub fn from_spec(spec: SweepSpec) -> Self {
        RunConfig {
            kind: spec.kind,
            metrics: spec.metrics,
            notes: spec.notes,
            output: OutputConfig::default(),
            fixed: spec.fixed,
            quadrature: spec.quadrature,
            axis: spec.axis,
        }
    }

    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            kind: self.kind,
            metrics: self.metrics.clone(),
            fixed: self.fixed.clone(),
            quadrature: self.quadrature,
            axis: self.axis.clone(),
            notes: self.notes.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Validation(vec![msg.into()])
}

/// Recursively merges `top` into `base`: tables merge key by key, anything else replaces.
pub fn deep_merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Table(b), Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_scalar(raw: &str) -> Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

/// Applies one `a.b.0.c=value` override.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error(format!("override {assignment:?} is not KEY=VALUE")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|s| s.is_empty()) {
        return Err(config_error(format!("override key {key:?} is malformed")));
    }
    let mut node = root;
    for (i, seg) in path.iter().enumerate() {
        let last = i + 1 == path.len();
        node = match node {
            Value::Table(t) => {
                if last {
                    t.insert((*seg).to_string(), parse_scalar(raw.trim()));
                    return Ok(());
                }
                t.entry(seg.to_string()).or_insert_with(|| Value::Table(toml::Table::new()))
            }
            Value::Array(a) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| config_error(format!("override {key:?}: {seg:?} is not an array index")))?;
                let len = a.len();
                let slot = a
                    .get_mut(idx)
                    .ok_or_else(|| config_error(format!("override {key:?}: index {idx} out of range (length {len})")))?;
                if last {
                    *slot = parse_scalar(raw.trim());
                    return Ok(());
                }
                slot
            }
            _ => return Err(config_error(format!("override {key:?}: {seg:?} is not inside a table"))),
        };
    }
    Ok(())
}

/// Builds a validated configuration from its layers.
pub fn load(base: Preset, config: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut value = Value::try_from(RunConfig::from_spec(preset(base))).map_err(|e| config_error(e.to_string()))?;
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let file: Value = toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        deep_merge(&mut value, file);
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let run: RunConfig = value.try_into().map_err(|e: toml::de::Error| config_error(e.to_string()))?;
    run.spec().validate()?;
    Ok(run)
}
