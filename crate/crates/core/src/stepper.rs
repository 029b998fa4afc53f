//! One implicit Euler step of the regularized scheme
//!
//! ```text
//! ∫ <u, v> + tau <M_eps(u) ∂u, ∂v> = ∫ <U, v>
//! ```
//!
//! solved by frozen-coefficient Picard iteration: the mobility is evaluated
//! at the current iterate, the resulting linear block-tridiagonal system is
//! solved directly, and the process repeats until the iterate stops moving.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::grid::{assemble_weighted_stiffness, Grid, NodalField};
use crate::liapunov::{mobility_reg, Matrix2, PhysParams, Vec2};

/// Smallest damping factor reached by repeated halving.
pub const MIN_DAMPING: f64 = 1.0 / 16.0;

/// Nodal heights `(f, g)` of the heavier and lighter fluid.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub f: NodalField,
    pub g: NodalField,
}

impl State {
    pub fn new(f: NodalField, g: NodalField) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::domain(format!(
                "state components differ in length: {} vs {}",
                f.len(),
                g.len()
            )));
        }
        Ok(Self { f, g })
    }

    pub fn constant(m: usize, cf: f64, cg: f64) -> Self {
        Self {
            f: NodalField::constant(m, cf),
            g: NodalField::constant(m, cg),
        }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    #[inline]
    pub fn at(&self, i: usize) -> Vec2 {
        Vec2::new(self.f[i], self.g[i])
    }

    /// Max-norm of the concatenated pair.
    pub fn linf(&self) -> f64 {
        self.f.linf().max(self.g.linf())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.f.iter().chain(self.g.iter()).all(|v| *v >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub tau: f64,
    pub epsilon: f64,
    pub picard_tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Clipping threshold for slightly negative entries, relative to the
    /// max-norm of the previous state.
    pub clip_tol: f64,
}

impl StepConfig {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive, got {v}")))
            }
        };
        positive("step.tau", self.tau)?;
        positive("step.epsilon", self.epsilon)?;
        positive("step.picard_tol", self.picard_tol)?;
        if self.max_iter < 1 {
            return Err(Error::config("step.max_iter", "must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::config(
                "step.damping",
                format!("must lie in (0, 1], got {}", self.damping),
            ));
        }
        if !(self.clip_tol >= 0.0 && self.clip_tol.is_finite()) {
            return Err(Error::config(
                "step.clip_tol",
                format!("must be non-negative, got {}", self.clip_tol),
            ));
        }
        Ok(())
    }
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            epsilon: 1e-8,
            picard_tol: 1e-10,
            max_iter: 200,
            damping: 1.0,
            clip_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub clipped_nodes: usize,
    pub linear_solves: usize,
}

/// `A u = rhs` with `A` block tridiagonal in 2×2 blocks, one block row per
/// node. Within a block, row/column 1 is `f` and row/column 2 is `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagSystem {
    /// `lower[i]` couples node `i + 1` to node `i`.
    pub lower: Vec<Matrix2>,
    pub diag: Vec<Matrix2>,
    /// `upper[i]` couples node `i` to node `i + 1`.
    pub upper: Vec<Matrix2>,
    pub rhs: Vec<Vec2>,
}

impl BlockTridiagSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, f: &[f64], g: &[f64]) -> Vec<Vec2> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut acc = self.diag[i].apply(Vec2::new(f[i], g[i]));
                if i > 0 {
                    acc = acc + self.lower[i - 1].apply(Vec2::new(f[i - 1], g[i - 1]));
                }
                if i + 1 < m {
                    acc = acc + self.upper[i].apply(Vec2::new(f[i + 1], g[i + 1]));
                }
                acc
            })
            .collect()
    }

    /// `max_i |A u - rhs|_inf`
    pub fn residual(&self, f: &[f64], g: &[f64]) -> f64 {
        self.mul(f, g)
            .iter()
            .zip(&self.rhs)
            .fold(0.0_f64, |acc, (a, b)| {
                acc.max((a.x1 - b.x1).abs()).max((a.x2 - b.x2).abs())
            })
    }

    fn to_banded(&self) -> (BandedMatrix, Vec<f64>) {
        let m = self.len();
        let mut a = BandedMatrix::zeros(2 * m, 3, 3);
        let mut put = |bi: usize, bj: usize, blk: &Matrix2| {
            a.set(2 * bi, 2 * bj, blk.m11);
            a.set(2 * bi, 2 * bj + 1, blk.m12);
            a.set(2 * bi + 1, 2 * bj, blk.m21);
            a.set(2 * bi + 1, 2 * bj + 1, blk.m22);
        };
        for i in 0..m {
            put(i, i, &self.diag[i]);
            if i + 1 < m {
                put(i, i + 1, &self.upper[i]);
                put(i + 1, i, &self.lower[i]);
            }
        }
        let rhs = self.rhs.iter().flat_map(|v| [v.x1, v.x2]).collect();
        (a, rhs)
    }
}

/// Assembles `Mass u + tau K(iterate) u = Mass prev`, with the four blocks of
/// `K` built from the entries of `M_eps` evaluated nodewise at the iterate.
pub fn frozen_system_assemble(
    g: &Grid,
    p: &PhysParams,
    cfg: &StepConfig,
    iterate: &State,
    prev: &State,
) -> Result<BlockTridiagSystem> {
    let m = g.len();
    if iterate.len() != m || prev.len() != m {
        return Err(Error::domain(format!(
            "state sizes ({}, {}) do not match grid size {m}",
            iterate.len(),
            prev.len()
        )));
    }
    let mut w11 = Vec::with_capacity(m);
    let mut w12 = Vec::with_capacity(m);
    let mut w21 = Vec::with_capacity(m);
    let mut w22 = Vec::with_capacity(m);
    for i in 0..m {
        let mob = mobility_reg(p, cfg.epsilon, iterate.at(i))?;
        w11.push(mob.m11);
        w12.push(mob.m12);
        w21.push(mob.m21);
        w22.push(mob.m22);
    }
    let k11 = assemble_weighted_stiffness(g, &w11)?;
    let k12 = assemble_weighted_stiffness(g, &w12)?;
    let k21 = assemble_weighted_stiffness(g, &w21)?;
    let k22 = assemble_weighted_stiffness(g, &w22)?;
    let tau = cfg.tau;

    let diag = (0..m)
        .map(|i| {
            let w = g.mass_weight(i);
            Matrix2::new(
                w + tau * k11.diag[i],
                tau * k12.diag[i],
                tau * k21.diag[i],
                w + tau * k22.diag[i],
            )
        })
        .collect();
    let upper = (0..m - 1)
        .map(|i| Matrix2::new(k11.sup[i], k12.sup[i], k21.sup[i], k22.sup[i]).scale(tau))
        .collect();
    let lower = (0..m - 1)
        .map(|i| Matrix2::new(k11.sub[i], k12.sub[i], k21.sub[i], k22.sub[i]).scale(tau))
        .collect();
    let rhs = (0..m).map(|i| g.mass_weight(i) * prev.at(i)).collect();
    Ok(BlockTridiagSystem {
        lower,
        diag,
        upper,
        rhs,
    })
}

/// Direct banded LU solve of the interleaved `(f_0, g_0, f_1, g_1, ...)` system.
pub fn solve_block_tridiagonal(system: &BlockTridiagSystem) -> Result<(NodalField, NodalField)> {
    let (a, mut x) = system.to_banded();
    a.solve(&mut x)
        .map_err(|row| Error::SingularPivot { node: row / 2, row })?;
    let (f, g): (Vec<f64>, Vec<f64>) = x.chunks_exact(2).map(|c| (c[0], c[1])).unzip();
    Ok((f.into(), g.into()))
}

fn relative_change(old: &State, f: &[f64], g: &[f64]) -> f64 {
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..old.len() {
        diff = diff
            .max((f[i] - old.f[i]).abs())
            .max((g[i] - old.g[i]).abs());
        scale = scale.max(f[i].abs()).max(g[i].abs());
    }
    if diff == 0.0 {
        0.0
    } else {
        diff / scale.max(f64::MIN_POSITIVE)
    }
}

fn clip(field: &mut [f64], component: &'static str, threshold: f64) -> Result<usize> {
    let mut clipped = 0;
    for (node, v) in field.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -threshold {
                return Err(Error::Positivity {
                    component,
                    node,
                    value: *v,
                    threshold,
                });
            }
            *v = 0.0;
            clipped += 1;
        }
    }
    Ok(clipped)
}

/// Advances `prev` by one implicit Euler step of length `cfg.tau`.
///
/// Each Picard iterate solves the linear system frozen at the previous
/// iterate. The damping factor is halved whenever the residual grows, down
/// to [`MIN_DAMPING`], and iteration continues until convergence or
/// `cfg.max_iter`.
pub fn picard_step(
    prev: &State,
    g: &Grid,
    p: &PhysParams,
    cfg: &StepConfig,
) -> Result<(State, StepStats)> {
    cfg.validate()?;
    if prev.len() != g.len() {
        return Err(Error::domain(format!(
            "state has {} nodes but the grid has {}",
            prev.len(),
            g.len()
        )));
    }
    if let Some(v) = prev.f.iter().chain(prev.g.iter()).find(|v| !(**v >= 0.0)) {
        return Err(Error::domain(format!(
            "previous state must be non-negative and finite, found {v}"
        )));
    }

    let mut iterate = prev.clone();
    let mut damping = cfg.damping;
    let mut last_residual = f64::INFINITY;
    let mut stats = StepStats::default();

    for it in 1..=cfg.max_iter {
        let system = frozen_system_assemble(g, p, cfg, &iterate, prev)?;
        let (f_new, g_new) = solve_block_tridiagonal(&system)?;
        stats.linear_solves += 1;
        stats.iterations = it;
        let residual = relative_change(&iterate, &f_new, &g_new);
        stats.final_residual = residual;

        if residual < cfg.picard_tol {
            let threshold = cfg.clip_tol * prev.linf().max(f64::MIN_POSITIVE);
            let mut next = State { f: f_new, g: g_new };
            stats.clipped_nodes =
                clip(&mut next.f, "f", threshold)? + clip(&mut next.g, "g", threshold)?;
            return Ok((next, stats));
        }
        if !residual.is_finite() {
            break;
        }
        if residual > last_residual {
            damping = (0.5 * damping).max(MIN_DAMPING);
        }
        last_residual = residual;

        if damping == 1.0 {
            iterate.f = f_new;
            iterate.g = g_new;
        } else {
            for (u, v) in iterate.f.iter_mut().zip(f_new.iter()) {
                *u = damping * v + (1.0 - damping) * *u;
            }
            for (u, v) in iterate.g.iter_mut().zip(g_new.iter()) {
                *u = damping * v + (1.0 - damping) * *u;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: stats.iterations,
        residual: stats.final_residual,
    })
}
