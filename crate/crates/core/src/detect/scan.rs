//! Sampling of the functional on a `(d, x, β)` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParameterPoint, SystemParams};

use super::experiment::Experiment;
use super::functional::{evaluate_weighted, Weighting};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanAxes {
    pub d: Vec<f64>,
    pub x: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ScanAxes {
    /// `n` points per axis: `d ∈ [0.05, 1]`, `x ∈ [eps, 1 − eps]` and the
    /// given `β` values.
    pub fn uniform(nd: usize, nx: usize, eps: f64, beta: Vec<f64>) -> Self {
        Self {
            d: linspace(0.05, 1.0, nd),
            x: linspace(eps, 1.0 - eps, nx),
            beta,
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `log10 𝔈` on the grid, NaN on inadmissible or failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceScan {
    pub axes: ScanAxes,
    /// Indexed by `[β][d][x]`, flattened.
    pub log10_e: Vec<f64>,
    /// Sublevel threshold on `𝔈` itself.
    pub level: f64,
    /// Fraction of valid cells with `𝔈 ≤ level`, per `β`.
    pub areas: Vec<f64>,
}

impl SurfaceScan {
    pub fn index(&self, b: usize, i: usize, j: usize) -> usize {
        (b * self.axes.d.len() + i) * self.axes.x.len() + j
    }

    pub fn at(&self, b: usize, i: usize, j: usize) -> f64 {
        self.log10_e[self.index(b, i, j)]
    }

    pub fn in_sublevel(&self, b: usize, i: usize, j: usize) -> bool {
        self.at(b, i, j) <= self.level.log10()
    }

    /// Smallest valid cell for tuning `b` as `(d, x, log10 𝔈)`.
    pub fn argmin(&self, b: usize) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (i, &d) in self.axes.d.iter().enumerate() {
            for (j, &x) in self.axes.x.iter().enumerate() {
                let v = self.at(b, i, j);
                if v.is_finite() && best.is_none_or(|bv| v < bv.2) {
                    best = Some((d, x, v));
                }
            }
        }
        best
    }

    /// Cells for tuning `b` strictly below all their valid 8-neighbours.
    pub fn strict_local_minima(&self, b: usize) -> Vec<(usize, usize)> {
        let (nd, nx) = (self.axes.d.len() as isize, self.axes.x.len() as isize);
        let mut out = Vec::new();
        for i in 0..nd {
            for j in 0..nx {
                let v = self.at(b, i as usize, j as usize);
                if !v.is_finite() {
                    continue;
                }
                let mut strict = true;
                let mut neighbours = 0;
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let (a, c) = (i + di, j + dj);
                        if (di, dj) == (0, 0) || a < 0 || c < 0 || a >= nd || c >= nx {
                            continue;
                        }
                        let w = self.at(b, a as usize, c as usize);
                        if w.is_finite() {
                            neighbours += 1;
                            strict &= v < w;
                        }
                    }
                }
                if strict && neighbours > 0 {
                    out.push((i as usize, j as usize));
                }
            }
        }
        out
    }
}

/// Evaluates the functional on every admissible cell. Data are measured once
/// per tuning.
pub fn scan_surface(
    experiment: &dyn Experiment,
    p: &SystemParams,
    eps: f64,
    axes: ScanAxes,
    level: f64,
    weighting: Weighting,
) -> Result<SurfaceScan> {
    if !(level > 0.0) {
        return Err(Error::InvalidInput(format!("sublevel threshold must be positive, got {level}")));
    }
    if axes.d.is_empty() || axes.x.is_empty() || axes.beta.is_empty() {
        return Err(Error::InvalidInput("scan axes must be non-empty".into()));
    }
    let mut log10_e = Vec::with_capacity(axes.beta.len() * axes.d.len() * axes.x.len());
    let mut areas = Vec::with_capacity(axes.beta.len());
    for &beta in &axes.beta {
        let data = experiment.measure(beta)?;
        let cells: Vec<(f64, f64)> = axes
            .d
            .iter()
            .flat_map(|&d| axes.x.iter().map(move |&x| (d, x)))
            .collect();
        let slice: Vec<f64> = cells
            .par_iter()
            .map(|&(d, x)| {
                let pi = ParameterPoint::new(d, x, beta);
                if !pi.is_admissible(eps) {
                    return f64::NAN;
                }
                evaluate_weighted(&pi, &data, p, eps, weighting)
                    .map_or(f64::NAN, |e| e.value.max(f64::MIN_POSITIVE).log10())
            })
            .collect();
        let valid = slice.iter().filter(|v| v.is_finite()).count();
        let below = slice.iter().filter(|&&v| v <= level.log10()).count();
        areas.push(if valid == 0 { f64::NAN } else { below as f64 / valid as f64 });
        log10_e.extend(slice);
    }
    Ok(SurfaceScan {
        axes,
        log10_e,
        level,
        areas,
    })
}
