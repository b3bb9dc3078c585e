//! Cross-checks of the spectral model against the finite element oracle.

use serde::Serialize;

use crate::error::Result;
use crate::model::{DamageProfile, FrequencyGrid};
use crate::oracle::{eigenfrequencies, fe_assemble, fe_frf, FeMesh, Spectrum};
use crate::spectral::{solve_frf, synthesize_measurements};

use super::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: serde_json::Value,
    pub requirement: String,
}

fn rel(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Largest relative SE/FE discrepancy of the boundary slopes.
pub fn frf_discrepancy(cfg: &RunConfig, elements: usize) -> Result<f64> {
    let (p, dp) = (&cfg.system, &cfg.damage);
    let v = &cfg.verify;
    let grid = FrequencyGrid::guarded(v.frf_lo, v.frf_hi, v.frf_count, p, cfg.grid.guard)?;
    let sys = fe_assemble(p, dp, &FeMesh::aligned(elements, p, dp)?)?;
    let mut worst: f64 = 0.0;
    for &w in grid.omegas() {
        for load in &cfg.loads {
            let se = solve_frf(w, p, dp, load)?.boundary_slopes();
            let fe = fe_frf(&sys, w, load)?;
            worst = worst.max(rel(se[0], fe[0])).max(rel(se[1], fe[1]));
        }
    }
    Ok(worst)
}

/// With γ = 0 the electric response ignores the beam: largest relative change
/// of the slopes between the damaged and undamaged beam, spectral and FE.
pub fn decoupling_defect(cfg: &RunConfig) -> Result<(f64, f64)> {
    let p = cfg.system.with_gamma(0.0);
    let dp = cfg.damage;
    let intact = DamageProfile::undamaged(dp.x, dp.eps);
    let grid = cfg.grid.build(&p)?;
    let a = synthesize_measurements(&p, &dp, &grid, &cfg.loads)?.set;
    let b = synthesize_measurements(&p, &intact, &grid, &cfg.loads)?.set;
    let mut se: f64 = 0.0;
    for (x, y) in a.cases.iter().zip(&b.cases) {
        for (m, n) in x.m.iter().zip(&y.m) {
            se = se.max(rel(m[0], n[0])).max(rel(m[1], n[1]));
        }
    }
    let n = cfg.verify.elements.min(60);
    let sd = fe_assemble(&p, &dp, &FeMesh::aligned(n, &p, &dp)?)?;
    let si = fe_assemble(&p, &intact, &FeMesh::aligned(n, &p, &intact)?)?;
    let mut fe: f64 = 0.0;
    for &w in grid.omegas() {
        for load in &cfg.loads {
            let (m, k) = (fe_frf(&sd, w, load)?, fe_frf(&si, w, load)?);
            fe = fe.max(rel(m[0], k[0])).max(rel(m[1], k[1]));
        }
    }
    Ok((se, fe))
}

/// Percent drop of the first three mechanical natural frequencies.
pub fn eigenfrequency_shifts(cfg: &RunConfig, elements: usize) -> Result<Vec<f64>> {
    let (p, dp) = (&cfg.system, &cfg.damage);
    let intact = DamageProfile::undamaged(dp.x, dp.eps);
    let damaged = fe_assemble(p, dp, &FeMesh::aligned(elements, p, dp)?)?;
    let reference = fe_assemble(p, &intact, &FeMesh::aligned(elements, p, &intact)?)?;
    let wd = eigenfrequencies(&damaged, 3, Spectrum::Mechanical)?;
    let w0 = eigenfrequencies(&reference, 3, Spectrum::Mechanical)?;
    Ok(w0.iter().zip(&wd).map(|(a, b)| 100.0 * (a - b) / a).collect())
}

/// Largest relative change of `|φ′|` at the boundaries between the damaged
/// and undamaged beam over the configured grid.
pub fn electric_change(cfg: &RunConfig) -> Result<f64> {
    let p = &cfg.system;
    let dp = cfg.damage;
    let grid = cfg.grid.build(p)?;
    let a = synthesize_measurements(p, &dp, &grid, &cfg.loads)?.set;
    let b = synthesize_measurements(p, &DamageProfile::undamaged(dp.x, dp.eps), &grid, &cfg.loads)?.set;
    let mut worst: f64 = 0.0;
    for (x, y) in a.cases.iter().zip(&b.cases) {
        for (m, n) in x.m.iter().zip(&y.m) {
            for k in 0..2 {
                worst = worst.max((m[k].norm() - n[k].norm()).abs() / n[k].norm());
            }
        }
    }
    Ok(worst)
}

pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let v = &cfg.verify;
    let mut out = Vec::new();

    let frf = frf_discrepancy(cfg, v.elements)?;
    out.push(Check {
        name: "frf-se-vs-fe",
        passed: frf < v.frf_tolerance,
        measured: serde_json::json!({ "max_relative_discrepancy": frf, "elements": v.elements }),
        requirement: format!("< {}", v.frf_tolerance),
    });

    let (se, fe) = decoupling_defect(cfg)?;
    out.push(Check {
        name: "decoupling-gamma-zero",
        passed: se <= 1e-10 && fe <= 1e-10,
        measured: serde_json::json!({ "spectral": se, "finite_element": fe }),
        requirement: "damage leaves the electric response unchanged to 1e-10".into(),
    });

    let shifts = eigenfrequency_shifts(cfg, v.elements)?;
    let [lo, hi] = v.shift_range;
    out.push(Check {
        name: "eigenfrequency-shifts",
        passed: shifts.iter().all(|s| (lo..=hi).contains(s)),
        measured: serde_json::json!({ "percent": shifts }),
        requirement: format!("each of the first three in [{lo}, {hi}] %"),
    });

    let change = electric_change(cfg)?;
    let largest_shift = shifts.iter().copied().fold(0.0, f64::max) / 100.0;
    out.push(Check {
        name: "electric-sensitivity",
        passed: change >= v.min_electric_change && change > largest_shift,
        measured: serde_json::json!({ "max_relative_change": change, "largest_shift": largest_shift }),
        requirement: format!(
            ">= {} and above the largest eigenfrequency shift",
            v.min_electric_change
        ),
    });
    Ok(out)
}
