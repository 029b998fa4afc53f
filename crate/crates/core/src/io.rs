//! CSV and JSON outputs of a run.
//!
//! Floats are written with 17 significant digits so that a read-back
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{config_to_json, ManifestMeta};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::simulator::{DiagnosticsRecord, RunConfig, SimulationResult};
use crate::stepper::State;

const BASE_COLUMNS: [&str; 10] = [
    "t",
    "mass_f",
    "mass_g",
    "linf_f",
    "linf_g",
    "linf_sum",
    "entropy",
    "dissipation",
    "energy",
    "picard_iters",
];

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

pub fn diagnostics_header(orders: &[usize]) -> Vec<String> {
    BASE_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(orders.iter().map(|n| format!("phi_{n}")))
        .collect()
}

pub fn write_diagnostics(
    path: &Path,
    records: &[DiagnosticsRecord],
    orders: &[usize],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(diagnostics_header(orders))
        .map_err(|e| csv_err(path, e))?;
    for r in records {
        let mut row = vec![
            fmt_f64(r.t),
            fmt_f64(r.mass_f),
            fmt_f64(r.mass_g),
            fmt_f64(r.linf_f),
            fmt_f64(r.linf_g),
            fmt_f64(r.linf_sum),
            fmt_f64(r.entropy),
            fmt_f64(r.dissipation),
            fmt_f64(r.energy),
            r.picard_iters.to_string(),
        ];
        for n in orders {
            let v = r
                .phi
                .get(n)
                .copied()
                .ok_or_else(|| Error::Data(format!("record at t = {} has no phi_{n}", r.t)))?;
            row.push(fmt_f64(v));
        }
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a diagnostics CSV written by [`write_diagnostics`].
pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: missing column `{name}`", path.display())))
    };
    let base = BASE_COLUMNS
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    let mut phi_cols = Vec::new();
    for (i, h) in header.iter().enumerate() {
        if let Some(n) = h.strip_prefix("phi_") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Data(format!("{}: bad column `{h}`", path.display())))?;
            phi_cols.push((n, i));
        } else if !BASE_COLUMNS.contains(&h) {
            return Err(Error::Data(format!(
                "{}: unknown column `{h}`",
                path.display()
            )));
        }
    }

    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::Data(format!(
                        "{}: row {}: bad value in column `{}`",
                        path.display(),
                        line + 2,
                        &header[i]
                    ))
                })
        };
        let iters = rec
            .get(base[9])
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| {
                Error::Data(format!(
                    "{}: row {}: bad picard_iters",
                    path.display(),
                    line + 2
                ))
            })?;
        let mut phi = BTreeMap::new();
        for (n, i) in &phi_cols {
            phi.insert(*n, num(*i)?);
        }
        out.push(DiagnosticsRecord {
            t: num(base[0])?,
            mass_f: num(base[1])?,
            mass_g: num(base[2])?,
            linf_f: num(base[3])?,
            linf_g: num(base[4])?,
            linf_sum: num(base[5])?,
            entropy: num(base[6])?,
            dissipation: num(base[7])?,
            energy: num(base[8])?,
            picard_iters: iters,
            phi,
        });
    }
    Ok(out)
}

/// Writes `x,f,g` rows for one state.
pub fn write_snapshot(path: &Path, grid: &Grid, state: &State) -> Result<()> {
    if state.len() != grid.len() {
        return Err(Error::domain("snapshot state does not match the grid"));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["x", "f", "g"])
        .map_err(|e| csv_err(path, e))?;
    for (i, x) in grid.nodes().enumerate() {
        w.write_record([fmt_f64(x), fmt_f64(state.f[i]), fmt_f64(state.g[i])])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads nodal `(f, g)` values from a CSV with either two columns `f,g` or
/// three columns `x,f,g` (as written by [`write_snapshot`]). A non-numeric
/// first row is treated as a header.
pub fn read_nodal_csv(path: &Path) -> Result<State> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut f = Vec::new();
    let mut g = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let vals: Option<Vec<f64>> = rec.iter().map(|s| s.parse::<f64>().ok()).collect();
        let vals = match vals {
            Some(v) => v,
            None if line == 0 => continue,
            None => {
                return Err(Error::Data(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    line + 1
                )))
            }
        };
        let (a, b) = match vals.len() {
            2 => (vals[0], vals[1]),
            3 => (vals[1], vals[2]),
            k => {
                return Err(Error::Data(format!(
                    "{}: row {} has {k} columns, expected 2 or 3",
                    path.display(),
                    line + 1
                )))
            }
        };
        f.push(a);
        g.push(b);
    }
    State::new(f.into(), g.into())
}

/// Writes `diagnostics.csv`, the snapshots and `manifest.json` into the
/// configured output directory and returns the written paths.
pub fn write_outputs(result: &SimulationResult, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = cfg
        .output
        .dir
        .as_ref()
        .ok_or_else(|| Error::config("output.dir", "no output directory configured"))?;
    write_outputs_to(result, cfg, dir)
}

pub fn write_outputs_to(
    result: &SimulationResult,
    cfg: &RunConfig,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = cfg.grid.build()?;
    let orders = cfg.sorted_orders();
    let mut written = Vec::new();

    let diag = dir.join("diagnostics.csv");
    write_diagnostics(&diag, &result.records, &orders)?;
    written.push(diag);

    for (i, (_, state)) in result.snapshots.iter().enumerate() {
        let p = dir.join(format!("snapshot_{i}.csv"));
        write_snapshot(&p, &grid, state)?;
        written.push(p);
    }

    let meta = ManifestMeta {
        version: crate::VERSION.to_string(),
        status: serde_json::to_value(&result.status).expect("status serializes"),
        steps_completed: result.steps_completed,
        records: result.records.len(),
        snapshots: result.snapshots.len(),
    };
    let manifest = dir.join("manifest.json");
    fs::write(&manifest, config_to_json(cfg, Some(&meta))).map_err(|e| Error::io(&manifest, e))?;
    written.push(manifest);
    Ok(written)
}
