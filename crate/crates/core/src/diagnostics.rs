//! Post-hoc audits of recorded diagnostics against the a priori estimates.
//!
//! Every audit is a pure function of its inputs. A check whose hypothesis
//! does not hold for the given parameters reports
//! [`AuditStatus::NotApplicable`] rather than passing or failing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liapunov::PhysParams;
use crate::simulator::DiagnosticsRecord;

/// Slack on the L∞ bounds.
pub const LINF_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub check: String,
    pub status: AuditStatus,
    /// Largest exceedance found, in the units described per audit; zero if
    /// nothing ever went the wrong way.
    pub worst_violation: f64,
    /// Record (or series) index of the worst exceedance.
    pub location: Option<usize>,
    pub tolerance: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.status != AuditStatus::Fail
    }

    fn named(mut self, name: impl Into<String>) -> Self {
        self.check = name.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditTolerances {
    pub monotone: f64,
    pub entropy: f64,
    pub linf: f64,
    pub mass: f64,
}

impl Default for AuditTolerances {
    fn default() -> Self {
        Self {
            monotone: 1e-8,
            entropy: 1e-6,
            linf: LINF_SLACK,
            mass: 1e-9,
        }
    }
}

impl AuditTolerances {
    /// Overrides one tolerance by name (`monotone`, `entropy`, `linf`, `mass`).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::config(
                key,
                format!("tolerance must be non-negative, got {value}"),
            ));
        }
        let slot = match key {
            "monotone" => &mut self.monotone,
            "entropy" => &mut self.entropy,
            "linf" => &mut self.linf,
            "mass" => &mut self.mass,
            _ => return Err(Error::config(key, "unknown tolerance")),
        };
        *slot = value;
        Ok(())
    }
}

/// Collects the largest of `(index, measure)` pairs and builds a report
/// failing iff that measure exceeds `limit`.
fn report(
    check: &str,
    tol: f64,
    measures: impl Iterator<Item = (usize, f64, bool)>,
) -> AuditReport {
    let mut worst = 0.0_f64;
    let mut location = None;
    let mut failed = false;
    for (i, v, bad) in measures {
        failed |= bad;
        if v > worst || (v.is_nan() && location.is_none()) {
            worst = v;
            location = Some(i);
        }
    }
    AuditReport {
        check: check.to_string(),
        status: if failed {
            AuditStatus::Fail
        } else {
            AuditStatus::Pass
        },
        worst_violation: worst,
        location,
        tolerance: tol,
    }
}

fn require_records(records: &[DiagnosticsRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::domain("no diagnostics records"))
    } else {
        Ok(())
    }
}

/// Fails iff some `s[k+1] > s[k] (1 + rel_tol) + rel_tol`. The violation is
/// the raw increase `s[k+1] - s[k]`, located at `k + 1`.
pub fn audit_monotone(series: &[f64], rel_tol: f64) -> Result<AuditReport> {
    if series.is_empty() {
        return Err(Error::domain("monotonicity audit needs a non-empty series"));
    }
    Ok(report(
        "monotone",
        rel_tol,
        series.windows(2).enumerate().map(|(k, w)| {
            let bad = !(w[1] <= w[0] * (1.0 + rel_tol) + rel_tol);
            (k + 1, w[1] - w[0], bad)
        }),
    ))
}

/// Largest per-step relative increase `(s[k+1] - s[k]) / |s[k]|`, or zero if
/// the series never increases.
pub fn worst_relative_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Entropy plus accumulated dissipation stays below the initial entropy:
/// `H(t_k) + Σ_{j≤k} (t_j - t_{j-1}) D(t_j) ≤ H(0) (1 + tol) + tol`.
/// The violation is `(lhs - H(0)) / (H(0) + 1)`.
pub fn audit_entropy_dissipation(
    records: &[DiagnosticsRecord],
    rel_tol: f64,
) -> Result<AuditReport> {
    require_records(records)?;
    let e0 = records[0].entropy;
    let mut acc = 0.0;
    let mut rows = Vec::with_capacity(records.len());
    for (k, w) in records.windows(2).enumerate() {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            return Err(Error::domain(format!(
                "record times not increasing at index {}",
                k + 1
            )));
        }
        acc += dt * w[1].dissipation;
        let lhs = w[1].entropy + acc;
        let bad = !(lhs <= e0 * (1.0 + rel_tol) + rel_tol);
        rows.push((k + 1, (lhs - e0) / (e0 + 1.0), bad));
    }
    Ok(report("entropy_dissipation", rel_tol, rows.into_iter()))
}

/// `‖f + g‖∞ ≤ (1+R)/R · initial_linf_sum · (1 + slack)`; the violation is
/// the relative excess over the unslacked bound.
pub fn audit_linf_bound(
    records: &[DiagnosticsRecord],
    p: &PhysParams,
    initial_linf_sum: f64,
    slack: f64,
) -> AuditReport {
    let bound = (1.0 + p.r()) / p.r() * initial_linf_sum;
    report(
        "linf_bound",
        slack,
        records.iter().enumerate().map(|(k, r)| {
            let bad = !(r.linf_sum <= bound * (1.0 + slack));
            (k, (r.linf_sum - bound) / bound.max(f64::MIN_POSITIVE), bad)
        }),
    )
}

/// Whether the small-R L∞ bound on `f` applies: `R max(1, μ) ≤ 1/(2e)`.
pub fn corollary_applies(p: &PhysParams) -> bool {
    p.r_max() <= 0.5 / E
}

/// `(1 + e max(1,μ)) ‖f_in‖∞ + ‖g_in‖∞`
pub fn corollary_bound(p: &PhysParams, linf_f_in: f64, linf_g_in: f64) -> f64 {
    (1.0 + E * p.mu().max(1.0)) * linf_f_in + linf_g_in
}

/// `‖f‖∞` against [`corollary_bound`] with relative slack; not applicable
/// outside the small-R regime.
pub fn audit_corollary_bound(
    records: &[DiagnosticsRecord],
    p: &PhysParams,
    initial: (f64, f64),
    slack: f64,
) -> AuditReport {
    if !corollary_applies(p) {
        return AuditReport {
            check: "corollary_bound".into(),
            status: AuditStatus::NotApplicable,
            worst_violation: 0.0,
            location: None,
            tolerance: slack,
        };
    }
    let bound = corollary_bound(p, initial.0, initial.1);
    report(
        "corollary_bound",
        slack,
        records.iter().enumerate().map(|(k, r)| {
            let bad = !(r.linf_f <= bound * (1.0 + slack));
            (k, (r.linf_f - bound) / bound.max(f64::MIN_POSITIVE), bad)
        }),
    )
}

/// `|mass(t) - mass(0)| ≤ rel_tol (mass(0) + 1)` for both components; the
/// violation is `|mass(t) - mass(0)| / (mass(0) + 1)`.
pub fn audit_mass(records: &[DiagnosticsRecord], rel_tol: f64) -> Result<AuditReport> {
    require_records(records)?;
    let (f0, g0) = (records[0].mass_f, records[0].mass_g);
    Ok(report(
        "mass",
        rel_tol,
        records.iter().enumerate().map(|(k, r)| {
            let df = (r.mass_f - f0).abs() / (f0.abs() + 1.0);
            let dg = (r.mass_g - g0).abs() / (g0.abs() + 1.0);
            let v = df.max(dg);
            (k, v, !(df <= rel_tol && dg <= rel_tol))
        }),
    ))
}

/// Runs every audit on one record series: mass, each recorded `phi_n`,
/// entropy, the L∞ bound and the small-R bound.
pub fn audit_all(
    records: &[DiagnosticsRecord],
    p: &PhysParams,
    tol: &AuditTolerances,
) -> Result<Vec<AuditReport>> {
    require_records(records)?;
    let first = &records[0];
    let mut out = vec![audit_mass(records, tol.mass)?];
    for n in first.phi.keys() {
        let series = records
            .iter()
            .map(|r| {
                r.phi
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::domain(format!("record at t = {} lacks phi_{n}", r.t)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(audit_monotone(&series, tol.monotone)?.named(format!("phi_{n}")));
    }
    out.push(audit_entropy_dissipation(records, tol.entropy)?);
    out.push(audit_linf_bound(records, p, first.linf_sum, tol.linf));
    out.push(audit_corollary_bound(
        records,
        p,
        (first.linf_f, first.linf_g),
        tol.linf,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn rec(t: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            mass_f: 1.0,
            mass_g: 2.0,
            linf_f: 1.0,
            linf_g: 2.0,
            linf_sum: 3.0,
            phi: BTreeMap::from([(2, 5.0)]),
            entropy: 0.0,
            dissipation: 0.0,
            energy: 2.5,
            picard_iters: 1,
        }
    }

    fn constant_run() -> Vec<DiagnosticsRecord> {
        (0..5).map(|k| rec(0.1 * k as f64)).collect()
    }

    #[test]
    fn monotone_examples() {
        let r = audit_monotone(&[1.0, 0.9, 0.8], 0.0).unwrap();
        assert_eq!(r.status, AuditStatus::Pass);
        assert_eq!(r.worst_violation, 0.0);

        let r = audit_monotone(&[1.0, 1.1], 1e-9).unwrap();
        assert_eq!(r.status, AuditStatus::Fail);
        assert_eq!(r.location, Some(1));
        assert!((r.worst_violation - 0.1).abs() < 1e-15);
        assert!(r.worst_violation > r.tolerance);

        assert!(audit_monotone(&[2.0; 4], 0.0).unwrap().passed());
        assert!(audit_monotone(&[3.0], 0.0).unwrap().passed());
        assert!(matches!(audit_monotone(&[], 0.0), Err(Error::Domain(_))));
        assert!(!audit_monotone(&[1.0, f64::NAN], 1.0).unwrap().passed());
    }

    #[test]
    fn relative_increase() {
        assert_eq!(worst_relative_increase(&[2.0, 1.0, 1.0]), 0.0);
        assert!((worst_relative_increase(&[2.0, 1.0, 1.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let r = audit_entropy_dissipation(&constant_run(), 0.0).unwrap();
        assert_eq!(r.status, AuditStatus::Pass);

        let mut run = constant_run();
        run[3].entropy = 0.5;
        let r = audit_entropy_dissipation(&run, 1e-6).unwrap();
        assert_eq!(r.status, AuditStatus::Fail);
        assert_eq!(r.location, Some(3));

        // decreasing entropy fully paid for by dissipation
        let mut run = constant_run();
        for (k, r) in run.iter_mut().enumerate() {
            r.entropy = 1.0 - 0.1 * k as f64;
            r.dissipation = if k == 0 { 0.0 } else { 1.0 };
        }
        assert!(audit_entropy_dissipation(&run, 1e-9).unwrap().passed());
        run[4].dissipation = 1.1;
        assert!(!audit_entropy_dissipation(&run, 1e-9).unwrap().passed());
    }

    #[test]
    fn linf_examples() {
        let p = PhysParams::new(1.0, 1.0).unwrap();
        let run = constant_run();
        assert!(audit_linf_bound(&run, &p, 3.0, LINF_SLACK).passed());
        let mut bad = run.clone();
        bad[2].linf_sum = 10.0 * 2.0 * 3.0;
        let r = audit_linf_bound(&bad, &p, 3.0, LINF_SLACK);
        assert_eq!(r.status, AuditStatus::Fail);
        assert_eq!(r.location, Some(2));
        assert!((r.worst_violation - 9.0).abs() < 1e-12);
    }

    #[test]
    fn corollary_examples() {
        let small = PhysParams::new(0.1, 1.0).unwrap();
        assert!(corollary_applies(&small));
        assert!((corollary_bound(&small, 1.0, 0.5) - (1.0 + E + 0.5)).abs() < 1e-15);
        let run = constant_run();
        assert_eq!(
            audit_corollary_bound(&run, &small, (1.0, 2.0), LINF_SLACK).status,
            AuditStatus::Pass
        );
        let mut bad = run.clone();
        bad[1].linf_f = 10.0;
        assert_eq!(
            audit_corollary_bound(&bad, &small, (1.0, 2.0), LINF_SLACK).status,
            AuditStatus::Fail
        );

        let unit = PhysParams::new(1.0, 1.0).unwrap();
        assert_eq!(
            audit_corollary_bound(&bad, &unit, (1.0, 2.0), LINF_SLACK).status,
            AuditStatus::NotApplicable
        );
        // R max(1, mu) decides, not R alone
        let big_mu = PhysParams::new(0.1, 2.0).unwrap();
        assert!(!corollary_applies(&big_mu));
    }

    #[test]
    fn mass_examples() {
        let run = constant_run();
        let r = audit_mass(&run, 0.0).unwrap();
        assert_eq!(r.status, AuditStatus::Pass);
        assert_eq!(r.worst_violation, 0.0);
        let mut bad = run.clone();
        bad[4].mass_f = 2.0;
        let r = audit_mass(&bad, 1e-9).unwrap();
        assert_eq!(r.status, AuditStatus::Fail);
        assert_eq!(r.location, Some(4));
        assert!(matches!(audit_mass(&[], 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn audit_all_is_deterministic() {
        let p = PhysParams::new(1.0, 2.0).unwrap();
        let tol = AuditTolerances::default();
        let a = audit_all(&constant_run(), &p, &tol).unwrap();
        let b = audit_all(&constant_run(), &p, &tol).unwrap();
        assert_eq!(a, b);
        let names: Vec<&str> = a.iter().map(|r| r.check.as_str()).collect();
        assert_eq!(
            names,
            [
                "mass",
                "phi_2",
                "entropy_dissipation",
                "linf_bound",
                "corollary_bound"
            ]
        );
        assert!(a.iter().all(|r| r.passed()));
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = AuditTolerances::default();
        t.set("mass", 1e-3).unwrap();
        assert_eq!(t.mass, 1e-3);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("linf", -1.0).is_err());
    }
}
