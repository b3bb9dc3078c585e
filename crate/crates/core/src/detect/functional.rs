use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{moments_to_forces, MeasurementSet, ParameterPoint, SystemParams};
use crate::spectral::{assemble, condense_boundary};

/// Per-term weighting of the unbalanced forces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    None,
    /// Divide each term by `|g★(ω_k)|²`.
    InputNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEval {
    pub value: f64,
    /// Frequencies that entered the sum.
    pub used: usize,
    /// Frequencies skipped because the model could not be condensed there.
    pub skipped: Vec<f64>,
}

/// Sum over load cases and frequencies of the squared unbalanced generalized
/// forces `|D̃(ω_k, π)·m★ − g★|²` on the two measured slopes.
pub fn evaluate_functional(
    pi: &ParameterPoint,
    data: &MeasurementSet,
    p: &SystemParams,
    eps: f64,
) -> Result<f64> {
    evaluate_weighted(pi, data, p, eps, Weighting::None).map(|e| e.value)
}

pub fn evaluate_weighted(
    pi: &ParameterPoint,
    data: &MeasurementSet,
    p: &SystemParams,
    eps: f64,
    weighting: Weighting,
) -> Result<FunctionalEval> {
    data.validate()?;
    let params = p.with_beta(pi.beta);
    let dp = pi.profile(eps);
    let mut value = 0.0;
    let mut used = 0;
    let mut skipped = Vec::new();
    for (k, &w) in data.grid.omegas().iter().enumerate() {
        let reduced = match assemble(w, &params, &dp).and_then(|ds| condense_boundary(&ds)) {
            Ok(c) => c.d_tilde,
            Err(e) if e.is_numerical() => {
                skipped.push(w);
                continue;
            }
            Err(e) => return Err(e),
        };
        used += 1;
        for case in &data.cases {
            let m = Vector2::new(case.m[k][0], case.m[k][1]);
            let g = moments_to_forces(case.g[k]);
            let f = Vector2::new(
                reduced[(0, 0)] * m[0] + reduced[(0, 1)] * m[1],
                reduced[(1, 0)] * m[0] + reduced[(1, 1)] * m[1],
            );
            // h★ ≡ 0, so the influence term drops out
            let r0: Complex64 = f[0] - g[0];
            let r1: Complex64 = f[1] - g[1];
            let mut term = r0.norm_sqr() + r1.norm_sqr();
            if weighting == Weighting::InputNorm {
                let scale = g[0].norm_sqr() + g[1].norm_sqr();
                if scale > 0.0 {
                    term /= scale;
                }
            }
            value += term;
        }
    }
    if used == 0 {
        return Err(Error::EmptyFrequencySet);
    }
    if !skipped.is_empty() {
        log::warn!(
            "functional at (d = {}, x = {}, beta = {}) skipped {} of {} frequencies",
            pi.d,
            pi.x,
            pi.beta,
            skipped.len(),
            data.grid.len()
        );
    }
    Ok(FunctionalEval {
        value,
        used,
        skipped,
    })
}

/// Central-difference gradient of the functional in `(d, x)`.
pub fn functional_gradient(
    pi: &ParameterPoint,
    data: &MeasurementSet,
    p: &SystemParams,
    eps: f64,
    step: f64,
) -> Result<[f64; 2]> {
    let f = |d: f64, x: f64| evaluate_functional(&ParameterPoint::new(d, x, pi.beta), data, p, eps);
    let gd = (f(pi.d + step, pi.x)? - f(pi.d - step, pi.x)?) / (2.0 * step);
    let gx = (f(pi.d, pi.x + step)? - f(pi.d, pi.x - step)?) / (2.0 * step);
    Ok([gd, gx])
}
