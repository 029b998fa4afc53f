//! `muskat`: run, sweep, certify and audit thin-film Muskat simulations.
//!
//! Exit codes: 0 success, 1 a failed audit/certificate or an aborted run,
//! 2 usage, configuration or I/O errors.

use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use muskat_core::certify::{certify_grid, RatParams};
use muskat_core::diagnostics::audit_all;
use muskat_core::io::{read_diagnostics, write_outputs};
use muskat_core::sweep::{run_sweep, SweepAxis, SweepParam};
use muskat_core::{parse_config_file, run_simulation, AuditReport, AuditTolerances, PhysParams};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "muskat",
    version,
    about = "Thin-film Muskat solver and Liapunov functional checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output.dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exactly certify the Liapunov polynomial identities for n = 2..=n-max
    Certify {
        #[arg(long)]
        n_max: usize,
        /// One or more rationals like `1/10`, comma separated
        #[arg(long = "R", value_delimiter = ',', required = true)]
        r: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<String>,
        #[arg(long, default_value_t = 50)]
        det_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rerun a config with settings varied together case by case
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Setting to vary: tau, epsilon or m (repeat to vary several together)
        #[arg(long, required = true)]
        vary: Vec<String>,
        /// Comma-separated values, one list per --vary
        #[arg(long, required = true)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a diagnostics.csv against the a priori estimates
    Audit {
        diagnostics: PathBuf,
        /// e.g. `monotone=1e-6,mass=1e-8`
        #[arg(long, value_delimiter = ',')]
        tol_overrides: Vec<String>,
        /// Parameters, if there is no manifest.json next to the CSV
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn simulate(config: &Path, out: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg = parse_config_file(config)?;
    if out.is_some() {
        cfg.output.dir = out;
    }
    let res = run_simulation(&cfg)?;
    let written = match cfg.output.dir {
        Some(_) => write_outputs(&res, &cfg)?,
        None => Vec::new(),
    };
    print_json(&json!({
        "status": res.status,
        "steps_completed": res.steps_completed,
        "final": res.records.last(),
        "written": written,
    }))?;
    Ok(if res.status.is_completed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn certify(
    n_max: usize,
    r: &[String],
    mu: &[String],
    det_samples: usize,
    seed: u64,
) -> Result<ExitCode> {
    let mut params = Vec::new();
    for r in r {
        for mu in mu {
            params.push(RatParams::parse(r, mu)?);
        }
    }
    let report = certify_grid(n_max, &params, det_samples, seed)?;
    print_json(&report)?;
    Ok(if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_axes(vary: &[String], values: &[String]) -> Result<Vec<SweepAxis>> {
    if vary.len() != values.len() {
        bail!("got {} --vary but {} --values", vary.len(), values.len());
    }
    vary.iter()
        .zip(values)
        .map(|(p, vs)| {
            let param: SweepParam = p.parse()?;
            let values = vs
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad value `{v}` for {p}"))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepAxis { param, values })
        })
        .collect()
}

fn sweep(
    config: &Path,
    vary: &[String],
    values: &[String],
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let mut cfg = parse_config_file(config)?;
    if out.is_some() {
        cfg.output.dir = out;
    }
    let axes = parse_axes(vary, values)?;
    let report = run_sweep(&cfg, &axes, &AuditTolerances::default())?;
    print_json(&report)?;
    Ok(if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// `(R, mu)` from flags, or else from the `phys` section of a manifest.json
/// beside the diagnostics file.
fn audit_params(csv: &Path, r: Option<f64>, mu: Option<f64>) -> Result<PhysParams> {
    if let (Some(r), Some(mu)) = (r, mu) {
        return Ok(PhysParams::new(r, mu)?);
    }
    let manifest = csv.with_file_name("manifest.json");
    let text = std::fs::read_to_string(&manifest)
        .with_context(|| format!("no --R/--mu given and cannot read {}", manifest.display()))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}", manifest.display()))?;
    let get = |key: &str| {
        doc["phys"][key]
            .as_f64()
            .ok_or_else(|| anyhow!("{}: missing phys.{key}", manifest.display()))
    };
    Ok(PhysParams::new(
        r.map_or_else(|| get("R"), Ok)?,
        mu.map_or_else(|| get("mu"), Ok)?,
    )?)
}

fn audit(csv: &Path, overrides: &[String], r: Option<f64>, mu: Option<f64>) -> Result<ExitCode> {
    let mut tol = AuditTolerances::default();
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("tolerance override `{o}` is not key=value"))?;
        let v: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("bad tolerance `{v}`"))?;
        tol.set(k.trim(), v)?;
    }
    let p = audit_params(csv, r, mu)?;
    let records = read_diagnostics(csv)?;
    let reports: Vec<AuditReport> = audit_all(&records, &p, &tol)?;
    let all_pass = reports.iter().all(AuditReport::passed);
    print_json(&json!({ "all_pass": all_pass, "tolerances": tol, "reports": reports }))?;
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Certify {
            n_max,
            r,
            mu,
            det_samples,
            seed,
        } => certify(n_max, &r, &mu, det_samples, seed),
        Command::Sweep {
            config,
            vary,
            values,
            out,
        } => sweep(&config, &vary, &values, out),
        Command::Audit {
            diagnostics,
            tol_overrides,
            r,
            mu,
        } => audit(&diagnostics, &tol_overrides, r, mu),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
