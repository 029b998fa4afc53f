//! Time loop: the piecewise-constant sequence `u_0 = u_in`,
//! `u_{l+1} = step(u_l)`, with diagnostics recorded along the way.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{gradient_sq_norm, integrate_unchecked, Grid};
use crate::ic::InitialCondition;
use crate::liapunov::{phi_eval, scalar_functionals, LiapunovPoly, PhysParams};
use crate::stepper::{picard_step, State, StepConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.a, self.b, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub snapshots_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub phys: PhysParams,
    pub step: StepConfig,
    pub t_end: f64,
    pub record_every: usize,
    pub phi_orders: Vec<usize>,
    pub ic: InitialCondition,
    pub output: OutputSpec,
}

pub const DEFAULT_PHI_ORDERS: [usize; 7] = [2, 3, 4, 5, 6, 7, 8];

impl RunConfig {
    /// A configuration with every optional setting at its default.
    pub fn new(
        grid: GridSpec,
        phys: PhysParams,
        tau: f64,
        t_end: f64,
        ic: InitialCondition,
    ) -> Self {
        Self {
            grid,
            phys,
            step: StepConfig::new(tau),
            t_end,
            record_every: 1,
            phi_orders: DEFAULT_PHI_ORDERS.to_vec(),
            ic,
            output: OutputSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid
            .build()
            .map_err(|e| Error::config("grid.m", e.to_string()))?;
        self.step.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config(
                "run.t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        if self.record_every < 1 {
            return Err(Error::config("run.record_every", "must be at least 1"));
        }
        if self.phi_orders.is_empty() {
            return Err(Error::config("run.phi_orders", "must not be empty"));
        }
        if let Some(n) = self
            .phi_orders
            .iter()
            .find(|n| **n < 2 || **n > crate::liapunov::MAX_ORDER)
        {
            return Err(Error::config(
                "run.phi_orders",
                format!(
                    "orders must lie in 2..={}, got {n}",
                    crate::liapunov::MAX_ORDER
                ),
            ));
        }
        if self.output.snapshots_every == Some(0) {
            return Err(Error::config(
                "output.snapshots_every",
                "must be at least 1",
            ));
        }
        self.ic.validate()
    }

    /// Sorted, de-duplicated Liapunov orders.
    pub fn sorted_orders(&self) -> Vec<usize> {
        let mut v = self.phi_orders.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Step lengths covering `[0, t_end]`: full steps of `tau`, plus one
    /// shortened step when `t_end` is not a multiple of `tau`.
    pub fn step_schedule(&self) -> (usize, Option<f64>) {
        let tau = self.step.tau;
        let ratio = self.t_end / tau;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            return (nearest as usize, None);
        }
        let full = ratio.floor() as usize;
        let rest = self.t_end - full as f64 * tau;
        (full, (rest > 0.0).then_some(rest))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_f: f64,
    pub mass_g: f64,
    pub linf_f: f64,
    pub linf_g: f64,
    pub linf_sum: f64,
    /// `∫ Phi_n` keyed by order.
    pub phi: BTreeMap<usize, f64>,
    pub entropy: f64,
    /// `‖∂f‖² + R ‖∂(f+g)‖²`
    pub dissipation: f64,
    pub energy: f64,
    pub picard_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Aborted { step: usize, reason: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: State,
    pub snapshots: Vec<(f64, State)>,
    pub status: RunStatus,
    pub steps_completed: usize,
}

/// Precomputed pieces needed to evaluate records on one grid.
pub struct Recorder {
    grid: Grid,
    phys: PhysParams,
    polys: Vec<(usize, LiapunovPoly)>,
}

impl Recorder {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let polys = cfg
            .sorted_orders()
            .into_iter()
            .map(|n| LiapunovPoly::new(n, &cfg.phys).map(|p| (n, p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: cfg.grid.build()?,
            phys: cfg.phys,
            polys,
        })
    }

    pub fn record(&self, state: &State, t: f64, picard_iters: usize) -> Result<DiagnosticsRecord> {
        let g = &self.grid;
        if state.len() != g.len() {
            return Err(Error::domain(format!(
                "state has {} nodes but the grid has {}",
                state.len(),
                g.len()
            )));
        }
        let m = g.len();
        let mut energy = Vec::with_capacity(m);
        let mut entropy = Vec::with_capacity(m);
        for i in 0..m {
            let (e, h) = scalar_functionals(&self.phys, state.at(i))?;
            energy.push(e);
            entropy.push(h);
        }
        let mut phi = BTreeMap::new();
        let mut buf = vec![0.0; m];
        for (n, poly) in &self.polys {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = phi_eval(poly, state.at(i))?;
            }
            phi.insert(*n, integrate_unchecked(g, &buf));
        }
        let sum: Vec<f64> = state
            .f
            .iter()
            .zip(state.g.iter())
            .map(|(a, b)| a + b)
            .collect();
        let dissipation =
            gradient_sq_norm(g, &state.f)? + self.phys.r() * gradient_sq_norm(g, &sum)?;
        Ok(DiagnosticsRecord {
            t,
            mass_f: integrate_unchecked(g, &state.f),
            mass_g: integrate_unchecked(g, &state.g),
            linf_f: state.f.linf(),
            linf_g: state.g.linf(),
            linf_sum: sum.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
            phi,
            entropy: integrate_unchecked(g, &entropy),
            dissipation,
            energy: integrate_unchecked(g, &energy),
            picard_iters,
        })
    }
}

pub fn make_record(
    state: &State,
    t: f64,
    cfg: &RunConfig,
    picard_iters: usize,
) -> Result<DiagnosticsRecord> {
    Recorder::new(cfg)?.record(state, t, picard_iters)
}

/// Runs the configured simulation. Configuration problems are errors; a
/// failing step ends the run early with [`RunStatus::Aborted`] and keeps
/// every record produced before the failure.
pub fn run_simulation(cfg: &RunConfig) -> Result<SimulationResult> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let initial = crate::ic::build_initial_condition(&cfg.ic, &grid)?;
    run_from_state(cfg, initial)
}

/// Same as [`run_simulation`] but starting from an explicit state.
pub fn run_from_state(cfg: &RunConfig, initial: State) -> Result<SimulationResult> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    if initial.len() != grid.len() {
        return Err(Error::domain(format!(
            "initial state has {} nodes but the grid has {}",
            initial.len(),
            grid.len()
        )));
    }
    if !initial.is_nonnegative() {
        return Err(Error::Data("initial condition must be non-negative".into()));
    }
    let recorder = Recorder::new(cfg)?;
    let (full, partial) = cfg.step_schedule();
    let total = full + usize::from(partial.is_some());

    let mut records = vec![recorder.record(&initial, 0.0, 0)?];
    let mut snapshots = Vec::new();
    if cfg.output.snapshots_every.is_some() {
        snapshots.push((0.0, initial.clone()));
    }
    let mut state = initial;
    let mut status = RunStatus::Completed;
    let mut steps_completed = 0;

    for k in 1..=total {
        let mut step_cfg = cfg.step;
        let t = if k <= full {
            k as f64 * cfg.step.tau
        } else {
            step_cfg.tau = partial.unwrap_or(cfg.step.tau);
            cfg.t_end
        };
        let t = if k == total { cfg.t_end } else { t };
        match picard_step(&state, &grid, &cfg.phys, &step_cfg) {
            Ok((next, stats)) => {
                state = next;
                steps_completed = k;
                if k % cfg.record_every == 0 || k == total {
                    records.push(recorder.record(&state, t, stats.iterations)?);
                }
                if let Some(every) = cfg.output.snapshots_every {
                    if k % every == 0 || k == total {
                        snapshots.push((t, state.clone()));
                    }
                }
            }
            Err(e) => {
                status = RunStatus::Aborted {
                    step: k,
                    reason: e.to_string(),
                };
                break;
            }
        }
    }

    Ok(SimulationResult {
        records,
        final_state: state,
        snapshots,
        status,
        steps_completed,
    })
}
