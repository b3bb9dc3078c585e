//! Multi-start identification of `(d, x)` at a fixed tuning.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    IdentificationResult, MeasurementSet, ParameterPoint, Status, Step, SystemParams, TraceEntry,
};

use super::functional::{evaluate_weighted, Weighting};
use super::simplex::{axis_simplex, nelder_mead, Bounds, SimplexOptions, SimplexResult};

/// Retention above which the estimate is indistinguishable from "no damage"
/// and the position carries no information.
pub const DEGENERATE_D: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentifyOptions {
    pub simplex: SimplexOptions,
    /// Number of random starts drawn in the admissible box.
    pub starts: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    pub weighting: Weighting,
    pub sampling: Sampling,
    /// Extra starting points tried before the random ones.
    pub fixed_starts: Vec<[f64; 2]>,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            starts: 4,
            initial_step: 0.1,
            weighting: Weighting::None,
            sampling: Sampling::LatinHypercube,
            fixed_starts: Vec::new(),
        }
    }
}

/// How the random starts are drawn in the admissible box.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Independent uniform draws.
    Uniform,
    /// One draw per row and column of an `n × n` stratification.
    #[default]
    LatinHypercube,
}

/// Admissible box for `(d, x)` at half-width `eps`.
pub fn admissible_bounds(eps: f64) -> Bounds {
    Bounds::new(vec![0.0, eps], vec![1.0, 1.0 - eps])
}

/// Functional in `(d, x)` with inadmissible or failed points mapped to NaN.
pub fn objective<'a>(
    data: &'a MeasurementSet,
    p: &'a SystemParams,
    eps: f64,
    beta: f64,
    weighting: Weighting,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |v: &[f64]| {
        let pi = ParameterPoint::new(v[0], v[1], beta);
        if !pi.is_admissible(eps) {
            return f64::NAN;
        }
        evaluate_weighted(&pi, data, p, eps, weighting).map_or(f64::NAN, |e| e.value)
    }
}

/// Starting points: the fixed ones followed by `opts.starts` seeded draws.
pub fn starting_points(eps: f64, opts: &IdentifyOptions) -> Vec<[f64; 2]> {
    let bounds = admissible_bounds(eps);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.simplex.seed);
    let n = opts.starts;
    let (mut rows, mut cols): (Vec<usize>, Vec<usize>) = ((0..n).collect(), (0..n).collect());
    if opts.sampling == Sampling::LatinHypercube {
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
    }
    let width = 1.0 - 2.0 * eps;
    let mut out = opts.fixed_starts.clone();
    for i in 0..n {
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        let mut p = match opts.sampling {
            Sampling::Uniform => [u, eps + width * v],
            Sampling::LatinHypercube => [
                (rows[i] as f64 + u) / n as f64,
                eps + width * (cols[i] as f64 + v) / n as f64,
            ],
        };
        bounds.clamp(&mut p);
        out.push(p);
    }
    out
}

/// Minimizes the functional over `(d, x)` at `data.beta` from several starts
/// and returns the best run.
pub fn identify(
    data: &MeasurementSet,
    p: &SystemParams,
    eps: f64,
    opts: &IdentifyOptions,
) -> Result<IdentificationResult> {
    data.validate()?;
    opts.simplex.validate()?;
    let starts = starting_points(eps, opts);
    if starts.is_empty() {
        return Err(Error::InvalidInput("no starting points".into()));
    }
    let bounds = admissible_bounds(eps);
    let beta = data.beta;
    let runs: Vec<Result<SimplexResult>> = starts
        .par_iter()
        .map(|s| {
            let f = objective(data, p, eps, beta, opts.weighting);
            nelder_mead(
                f,
                axis_simplex(s, opts.initial_step, Some(&bounds)),
                Some(&bounds),
                &opts.simplex,
            )
        })
        .collect();

    let mut trace = Vec::new();
    let mut best: Option<(usize, SimplexResult)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let run = match run {
            Ok(r) => r,
            Err(Error::NonFiniteStart) => {
                log::warn!("start {:?} has no finite functional value, skipped", starts[i]);
                continue;
            }
            Err(e) => return Err(e),
        };
        for (it, (v, f)) in run.history.iter().enumerate() {
            trace.push(TraceEntry {
                run: i,
                iteration: it,
                step: if it == 0 { Step::Start } else { Step::Minimize },
                point: ParameterPoint::new(v[0], v[1], beta),
                value: *f,
            });
        }
        if best.as_ref().is_none_or(|(_, b)| run.value < b.value) {
            best = Some((i, run));
        }
    }
    let (_, best) = best.ok_or(Error::NonFiniteStart)?;
    let d_hat = best.argmin[0];
    let status = if d_hat > DEGENERATE_D {
        Status::DegenerateX
    } else if best.converged {
        Status::Converged
    } else {
        Status::MaxIters
    };
    Ok(IdentificationResult {
        d_hat,
        x_hat: best.argmin[1],
        beta_used: beta,
        e_final: best.value,
        status,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DamageProfile, FrequencyGrid, LoadCase};
    use crate::spectral::synthesize_measurements;

    fn data(dp: &DamageProfile) -> MeasurementSet {
        let p = SystemParams::baseline();
        let grid = FrequencyGrid::default_for(&p).unwrap();
        synthesize_measurements(&p, dp, &grid, &[LoadCase::real(0.0, 1.0)])
            .unwrap()
            .set
    }

    #[test]
    fn starts_are_seeded_and_admissible() {
        let o = IdentifyOptions::default();
        let a = starting_points(0.05, &o);
        assert_eq!(a, starting_points(0.05, &o));
        assert_eq!(a.len(), 4);
        for s in &a {
            assert!(ParameterPoint::new(s[0], s[1], 1.0).is_admissible(0.05));
        }
        let mut o2 = o.clone();
        o2.simplex.seed = 1;
        assert_ne!(a, starting_points(0.05, &o2));
    }

    #[test]
    fn latin_hypercube_fills_every_stratum() {
        let o = IdentifyOptions {
            starts: 8,
            ..Default::default()
        };
        let s = starting_points(0.05, &o);
        let mut rows: Vec<usize> = s.iter().map(|p| (p[0] * 8.0) as usize).collect();
        let mut cols: Vec<usize> = s.iter().map(|p| ((p[1] - 0.05) / 0.9 * 8.0) as usize).collect();
        rows.sort();
        cols.sort();
        assert_eq!(rows, (0..8).collect::<Vec<_>>());
        assert_eq!(cols, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn recovers_from_a_nearby_start() {
        let set = data(&DamageProfile::baseline());
        let opts = IdentifyOptions {
            starts: 0,
            fixed_starts: vec![[0.45, 0.75]],
            initial_step: 0.05,
            ..Default::default()
        };
        let r = identify(&set, &SystemParams::baseline(), 0.05, &opts).unwrap();
        assert!((r.d_hat - 0.5).abs() < 1e-4 && (r.x_hat - 0.8).abs() < 1e-4, "{r:?}");
        assert_eq!(r.status, Status::Converged);
    }

    #[test]
    fn undamaged_data_is_flagged_degenerate() {
        let set = data(&DamageProfile::undamaged(0.5, 0.05));
        let opts = IdentifyOptions {
            starts: 0,
            fixed_starts: vec![[0.9, 0.3]],
            initial_step: 0.05,
            ..Default::default()
        };
        let r = identify(&set, &SystemParams::baseline(), 0.05, &opts).unwrap();
        assert_eq!(r.status, Status::DegenerateX, "{r:?}");
    }
}
