//! Parameter sweeps: the same configuration rerun with one or more settings
//! varied together, case by case.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{audit_all, worst_relative_increase, AuditReport, AuditTolerances};
use crate::error::{Error, Result};
use crate::simulator::{run_simulation, RunConfig, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Tau,
    Epsilon,
    M,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(SweepParam::Tau),
            "epsilon" => Ok(SweepParam::Epsilon),
            "m" => Ok(SweepParam::M),
            _ => Err(Error::config(
                "vary",
                format!("expected tau, epsilon or m, got `{s}`"),
            )),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Tau => "tau",
            SweepParam::Epsilon => "epsilon",
            SweepParam::M => "m",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCase {
    pub index: usize,
    pub settings: BTreeMap<String, f64>,
    pub status: RunStatus,
    pub steps_completed: usize,
    pub max_picard_iters: usize,
    /// Largest per-step relative increase of each `phi_n`.
    pub worst_phi_increase: BTreeMap<usize, f64>,
    pub audits: Vec<AuditReport>,
    pub wall_time_s: f64,
}

impl SweepCase {
    pub fn passed(&self) -> bool {
        self.status.is_completed() && self.audits.iter().all(|a| a.passed())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub all_pass: bool,
    pub cases: Vec<SweepCase>,
}

fn apply(cfg: &mut RunConfig, param: SweepParam, v: f64) -> Result<()> {
    match param {
        SweepParam::Tau => cfg.step.tau = v,
        SweepParam::Epsilon => cfg.step.epsilon = v,
        SweepParam::M => {
            if !(v >= 2.0 && v.fract() == 0.0 && v <= u32::MAX as f64) {
                return Err(Error::config(
                    "grid.m",
                    format!("must be an integer >= 2, got {v}"),
                ));
            }
            cfg.grid.m = v as usize;
        }
    }
    Ok(())
}

/// Builds one configuration per case. Axes are varied together: case `i`
/// takes the `i`-th value of every axis, so all axes need the same length.
pub fn sweep_configs(base: &RunConfig, axes: &[SweepAxis]) -> Result<Vec<RunConfig>> {
    let len = axes
        .first()
        .map(|a| a.values.len())
        .ok_or_else(|| Error::config("vary", "no sweep axis given"))?;
    if len == 0 {
        return Err(Error::config("values", "no sweep values given"));
    }
    for a in axes {
        if a.values.len() != len {
            return Err(Error::config(
                "values",
                format!(
                    "axis {} has {} values, expected {len}",
                    a.param,
                    a.values.len()
                ),
            ));
        }
        if axes.iter().filter(|b| b.param == a.param).count() > 1 {
            return Err(Error::config(
                "vary",
                format!("{} given more than once", a.param),
            ));
        }
    }
    (0..len)
        .map(|i| {
            let mut cfg = base.clone();
            cfg.record_every = 1;
            for a in axes {
                apply(&mut cfg, a.param, a.values[i])?;
            }
            if let Some(dir) = &base.output.dir {
                cfg.output.dir = Some(dir.join(format!("case_{i}")));
            }
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// Runs every case (in parallel), audits it, and writes per-case outputs
/// under `case_<i>` when the base configuration has an output directory.
pub fn run_sweep(
    base: &RunConfig,
    axes: &[SweepAxis],
    tol: &AuditTolerances,
) -> Result<SweepReport> {
    let configs = sweep_configs(base, axes)?;
    let cases = configs
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let start = Instant::now();
            let res = run_simulation(cfg)?;
            let audits = audit_all(&res.records, &cfg.phys, tol)?;
            let mut worst_phi_increase = BTreeMap::new();
            for n in cfg.sorted_orders() {
                let series: Vec<f64> = res.records.iter().map(|r| r.phi[&n]).collect();
                worst_phi_increase.insert(n, worst_relative_increase(&series));
            }
            if cfg.output.dir.is_some() {
                crate::io::write_outputs(&res, cfg)?;
            }
            Ok(SweepCase {
                index,
                settings: axes
                    .iter()
                    .map(|a| (a.param.to_string(), a.values[index]))
                    .collect(),
                status: res.status,
                steps_completed: res.steps_completed,
                max_picard_iters: res
                    .records
                    .iter()
                    .map(|r| r.picard_iters)
                    .max()
                    .unwrap_or(0),
                worst_phi_increase,
                audits,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        all_pass: cases.iter().all(|c| c.passed()),
        cases,
    })
}
