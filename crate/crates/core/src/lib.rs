//! Thin-film Muskat system: polynomial Liapunov functionals, their exact
//! rational certification, and a regularized implicit Euler solver with
//! post-hoc audits of the discrete solutions.

pub mod banded;
pub mod certify;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod ic;
pub mod io;
pub mod liapunov;
pub mod simulator;
pub mod stepper;
pub mod sweep;

pub use config::{parse_config, parse_config_file};
pub use diagnostics::{AuditReport, AuditStatus, AuditTolerances};
pub use error::{Error, Result};
pub use grid::{build_grid, Grid, NodalField};
pub use ic::InitialCondition;
pub use liapunov::{LiapunovPoly, Matrix2, PhysParams, Vec2};
pub use simulator::{
    run_simulation, DiagnosticsRecord, GridSpec, RunConfig, RunStatus, SimulationResult,
};
pub use stepper::{picard_step, State, StepConfig};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
