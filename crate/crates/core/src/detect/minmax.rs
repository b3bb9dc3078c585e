//! Alternating max–min tuning: pick the line stiffness that makes the
//! current estimate look worst, then re-identify with data taken at that
//! tuning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    IdentificationResult, ParameterPoint, Status, Step, SystemParams, TraceEntry,
};

use super::experiment::Experiment;
use super::functional::{evaluate_weighted, Weighting};
use super::identify::{admissible_bounds, objective};
use super::simplex::{axis_simplex, nelder_mead, SimplexOptions};

/// Relative value below which the functional is treated as an exact fit.
pub const ZERO_FIT: f64 = 1e-10;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinMaxOptions {
    pub simplex: SimplexOptions,
    /// Search interval for `β`.
    pub bracket: [f64; 2],
    /// Uniform samples of the bracket before the golden-section search;
    /// below 2 the search covers the whole bracket.
    pub coarse_points: usize,
    /// Final width of the golden-section interval.
    pub beta_tol: f64,
    /// Stop once `(d, x)` moves less than this (max norm) in one outer step.
    pub tol: f64,
    pub max_outer: usize,
    pub initial_step: f64,
    pub weighting: Weighting,
}

impl Default for MinMaxOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            bracket: [0.5, 2.0],
            coarse_points: 0,
            beta_tol: 1e-3,
            tol: 1e-5,
            max_outer: 20,
            initial_step: 0.05,
            weighting: Weighting::None,
        }
    }
}

impl MinMaxOptions {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.bracket;
        if !(lo > 0.0 && hi > lo && self.beta_tol > 0.0 && self.tol > 0.0)
        {
            return Err(Error::InvalidInput(format!("invalid max-min options: {self:?}")));
        }
        self.simplex.validate()
    }
}

/// Maximizes `f` on `[lo, hi]` by golden-section search. With `coarse ≥ 2`
/// a uniform sweep first picks the best sample and the search is confined to
/// its neighbours. Non-finite values count as `−∞`.
pub fn maximize_scalar<F>(mut f: F, lo: f64, hi: f64, coarse: usize, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut g = |b: f64| {
        let v = f(b);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let (mut a, mut c) = (lo, hi);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    if coarse >= 2 {
        let h = (hi - lo) / (coarse - 1) as f64;
        let samples: Vec<(f64, f64)> = (0..coarse)
            .map(|i| {
                let b = lo + h * i as f64;
                (b, g(b))
            })
            .collect();
        let ib = (0..coarse)
            .max_by(|&i, &j| samples[i].1.total_cmp(&samples[j].1))
            .expect("at least two samples");
        best = samples[ib];
        a = if ib == 0 { lo } else { samples[ib - 1].0 };
        c = if ib + 1 == coarse { hi } else { samples[ib + 1].0 };
    }
    let mut x1 = c - INV_PHI * (c - a);
    let mut x2 = a + INV_PHI * (c - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while c - a > tol {
        if f1 >= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - INV_PHI * (c - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (c - a);
            f2 = g(x2);
        }
    }
    for (b, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 || best.0.is_nan() {
            best = (b, v);
        }
    }
    best
}

/// Alternates `β ← argmax_β 𝔈(π₁, β)` and `π₁ ← argmin_π₁ 𝔈(π₁, β)` starting
/// from `start`, measuring fresh data for every tuning that is evaluated.
pub fn tune_minmax(
    experiment: &dyn Experiment,
    p: &SystemParams,
    eps: f64,
    start: ParameterPoint,
    opts: &MinMaxOptions,
) -> Result<IdentificationResult> {
    opts.validate()?;
    if !start.is_admissible(eps) {
        return Err(Error::InvalidInput(format!("start {start:?} is not admissible")));
    }
    let bounds = admissible_bounds(eps);
    let mut pi1 = start.pi1();
    let mut beta = start.beta;
    let mut trace = vec![TraceEntry {
        run: 0,
        iteration: 0,
        step: Step::Start,
        point: start,
        value: f64::NAN,
    }];
    let mut displacements: Vec<f64> = Vec::new();
    let mut status = Status::MaxIters;
    let mut e_final = f64::NAN;

    for outer in 1..=opts.max_outer {
        let mut first_error = None;
        let (b, vmax) = maximize_scalar(
            |b| {
                let data = match experiment.measure(b) {
                    Ok(d) => d,
                    Err(e) => {
                        first_error.get_or_insert(e);
                        return f64::NAN;
                    }
                };
                let pi = ParameterPoint::new(pi1[0], pi1[1], b);
                evaluate_weighted(&pi, &data, p, eps, opts.weighting).map_or(f64::NAN, |e| e.value)
            },
            opts.bracket[0],
            opts.bracket[1],
            opts.coarse_points,
            opts.beta_tol,
        );
        if let Some(e) = first_error {
            return Err(e);
        }
        if !vmax.is_finite() {
            return Err(Error::EmptyFrequencySet);
        }
        // a point that fits every tuning to rounding gives no preference
        let floor = ZERO_FIT * experiment.measure(b)?.input_scale();
        if vmax > floor {
            beta = b;
        }
        trace.push(TraceEntry {
            run: outer,
            iteration: 0,
            step: Step::Maximize,
            point: ParameterPoint::new(pi1[0], pi1[1], beta),
            value: if beta == b { vmax } else { f64::NAN },
        });

        let data = experiment.measure(beta)?;
        let run = nelder_mead(
            objective(&data, p, eps, beta, opts.weighting),
            axis_simplex(&pi1, opts.initial_step, Some(&bounds)),
            Some(&bounds),
            &opts.simplex,
        )?;
        for (it, (v, f)) in run.history.iter().enumerate().skip(1) {
            trace.push(TraceEntry {
                run: outer,
                iteration: it,
                step: Step::Minimize,
                point: ParameterPoint::new(v[0], v[1], beta),
                value: *f,
            });
        }
        let moved = (run.argmin[0] - pi1[0])
            .abs()
            .max((run.argmin[1] - pi1[1]).abs());
        pi1 = [run.argmin[0], run.argmin[1]];
        e_final = run.value;
        log::info!(
            "outer {outer}: beta = {beta:.6}, (d, x) = ({:.6}, {:.6}), moved {moved:.3e}",
            pi1[0],
            pi1[1]
        );
        displacements.push(moved);
        if moved < opts.tol {
            status = Status::Converged;
            break;
        }
        if let [a, b, c] = displacements[displacements.len().saturating_sub(3)..] {
            if a <= b && b <= c {
                status = Status::NonConvergent;
                break;
            }
        }
    }
    if status == Status::Converged && pi1[0] > super::identify::DEGENERATE_D {
        status = Status::DegenerateX;
    }
    Ok(IdentificationResult {
        d_hat: pi1[0],
        x_hat: pi1[1],
        beta_used: beta,
        e_final,
        status,
        trace,
    })
}
