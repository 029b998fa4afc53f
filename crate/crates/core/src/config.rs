//! Run configuration documents.
//!
//! A configuration is a nested key-value document (TOML or JSON) with the
//! sections `domain`, `grid`, `phys`, `step`, `run`, `ic` and optionally
//! `output`. Unknown keys are rejected. A written `manifest.json` is itself
//! a valid configuration document: it carries the fully resolved config plus
//! a `meta` section that the parser ignores.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ic::InitialCondition;
use crate::liapunov::PhysParams;
use crate::simulator::{GridSpec, OutputSpec, RunConfig, DEFAULT_PHI_ORDERS};
use crate::stepper::StepConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainDoc {
    a: f64,
    b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    m: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysDoc {
    #[serde(rename = "R")]
    r: f64,
    mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    picard_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clip_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    record_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi_orders: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snapshots_every: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    domain: DomainDoc,
    grid: GridDoc,
    phys: PhysDoc,
    step: StepDoc,
    run: RunDoc,
    ic: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<OutputDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
}

/// Bookkeeping written alongside the resolved config in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMeta {
    pub version: String,
    pub status: Value,
    pub steps_completed: usize,
    pub records: usize,
    pub snapshots: usize,
}

/// Turns a serde path error into a config error naming the dotted key.
fn key_error<E: std::fmt::Display>(prefix: &str, err: serde_path_to_error::Error<E>) -> Error {
    let path = err.path().to_string();
    let msg = err.inner().to_string();
    let mut key = if path == "." { String::new() } else { path };
    for marker in ["missing field `", "unknown field `"] {
        if let Some(rest) = msg.strip_prefix(marker) {
            if let Some(name) = rest.split('`').next() {
                if key == name || key.ends_with(&format!(".{name}")) {
                    continue;
                }
                if !key.is_empty() {
                    key.push('.');
                }
                key.push_str(name);
            }
        }
    }
    let key = match (prefix.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{key}"),
    };
    Error::config(key, msg)
}

fn to_value(text: &str) -> Result<Value> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))
    } else {
        let t: toml::Table =
            toml::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        serde_json::to_value(t).map_err(|e| Error::config("<document>", e.to_string()))
    }
}

fn parse_ic(v: Value, base: Option<&Path>) -> Result<InitialCondition> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::config("ic", "must be a table"))?;
    if let Some(file) = obj.get("file") {
        if let Some(extra) = obj.keys().find(|k| *k != "file") {
            return Err(Error::config(
                format!("ic.{extra}"),
                "not allowed together with ic.file",
            ));
        }
        let path = file
            .as_str()
            .ok_or_else(|| Error::config("ic.file", "must be a path string"))?;
        let mut path = PathBuf::from(path);
        if path.is_relative() {
            if let Some(b) = base {
                path = b.join(path);
            }
        }
        return Ok(InitialCondition::File { path });
    }
    if !obj.contains_key("preset") {
        return Err(Error::config(
            "ic.preset",
            "one of ic.preset or ic.file is required",
        ));
    }
    serde_path_to_error::deserialize(v).map_err(|e| key_error("ic", e))
}

fn ic_to_value(ic: &InitialCondition) -> Value {
    match ic {
        InitialCondition::File { path } => serde_json::json!({ "file": path }),
        other => serde_json::to_value(other).expect("presets serialize"),
    }
}

/// Parses and validates a configuration document, filling defaults.
/// Relative `ic.file` paths are taken relative to the working directory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_base(text, None)
}

/// Like [`parse_config`], resolving relative `ic.file` paths against `base`.
pub fn parse_config_with_base(text: &str, base: Option<&Path>) -> Result<RunConfig> {
    let value = to_value(text)?;
    let doc: ConfigDoc = serde_path_to_error::deserialize(value).map_err(|e| key_error("", e))?;

    if !(doc.domain.a.is_finite() && doc.domain.b.is_finite() && doc.domain.a < doc.domain.b) {
        return Err(Error::config("domain.b", "domain needs a < b"));
    }
    if doc.grid.m < 2 {
        return Err(Error::config(
            "grid.m",
            format!("needs at least 2 nodes, got {}", doc.grid.m),
        ));
    }
    if !(doc.phys.r > 0.0 && doc.phys.r.is_finite()) {
        return Err(Error::config(
            "phys.R",
            format!("must be positive, got {}", doc.phys.r),
        ));
    }
    if !(doc.phys.mu > 0.0 && doc.phys.mu.is_finite()) {
        return Err(Error::config(
            "phys.mu",
            format!("must be positive, got {}", doc.phys.mu),
        ));
    }
    let phys = PhysParams::new(doc.phys.r, doc.phys.mu)?;

    let d = StepConfig::default();
    let step = StepConfig {
        tau: doc.step.tau,
        epsilon: doc.step.epsilon.unwrap_or(d.epsilon),
        picard_tol: doc.step.picard_tol.unwrap_or(d.picard_tol),
        max_iter: doc.step.max_iter.unwrap_or(d.max_iter),
        damping: doc.step.damping.unwrap_or(d.damping),
        clip_tol: doc.step.clip_tol.unwrap_or(d.clip_tol),
    };
    let output = doc.output.unwrap_or_default();
    let cfg = RunConfig {
        grid: GridSpec {
            a: doc.domain.a,
            b: doc.domain.b,
            m: doc.grid.m,
        },
        phys,
        step,
        t_end: doc.run.t_end,
        record_every: doc.run.record_every.unwrap_or(1),
        phi_orders: doc
            .run
            .phi_orders
            .unwrap_or_else(|| DEFAULT_PHI_ORDERS.to_vec()),
        ic: parse_ic(doc.ic, base)?,
        output: OutputSpec {
            dir: output.dir.map(|d| match base {
                Some(b) if d.is_relative() => b.join(d),
                _ => d,
            }),
            snapshots_every: output.snapshots_every,
        },
    };
    cfg.validate()?;
    if let InitialCondition::File { .. } = cfg.ic {
        // row count and sign checks
        crate::ic::build_initial_condition(&cfg.ic, &cfg.grid.build()?)?;
    }
    Ok(cfg)
}

/// Reads a configuration file; relative paths inside are resolved against
/// the file's directory.
pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with_base(&text, path.parent())
}

fn to_doc(cfg: &RunConfig, meta: Option<&ManifestMeta>) -> ConfigDoc {
    ConfigDoc {
        domain: DomainDoc {
            a: cfg.grid.a,
            b: cfg.grid.b,
        },
        grid: GridDoc { m: cfg.grid.m },
        phys: PhysDoc {
            r: cfg.phys.r(),
            mu: cfg.phys.mu(),
        },
        step: StepDoc {
            tau: cfg.step.tau,
            epsilon: Some(cfg.step.epsilon),
            picard_tol: Some(cfg.step.picard_tol),
            max_iter: Some(cfg.step.max_iter),
            damping: Some(cfg.step.damping),
            clip_tol: Some(cfg.step.clip_tol),
        },
        run: RunDoc {
            t_end: cfg.t_end,
            record_every: Some(cfg.record_every),
            phi_orders: Some(cfg.phi_orders.clone()),
        },
        ic: ic_to_value(&cfg.ic),
        output: Some(OutputDoc {
            dir: cfg.output.dir.clone(),
            snapshots_every: cfg.output.snapshots_every,
        }),
        meta: meta.map(|m| serde_json::to_value(m).expect("meta serializes")),
    }
}

/// Fully resolved configuration as a JSON document.
pub fn config_to_json(cfg: &RunConfig, meta: Option<&ManifestMeta>) -> String {
    serde_json::to_string_pretty(&to_doc(cfg, meta)).expect("config serializes")
}

/// Extracts the `meta` section of a manifest, if present.
pub fn manifest_meta(text: &str) -> Result<Option<ManifestMeta>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Data(e.to_string()))?;
    match v.get("meta") {
        None => Ok(None),
        Some(m) => serde_json::from_value(m.clone())
            .map(Some)
            .map_err(|e| Error::Data(format!("manifest meta: {e}"))),
    }
}
