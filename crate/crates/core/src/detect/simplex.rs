//! Nelder–Mead downhill simplex with box clamping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inward offset applied when a trial point is clamped onto the box.
pub const BOX_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once every vertex is this close to the best one.
    pub diameter_tol: f64,
    /// Stop once `f_worst − f_best` is at most this.
    pub value_tol: f64,
    pub max_iters: usize,
    /// Seed for random starting points (used by multi-start callers).
    pub seed: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            diameter_tol: 1e-8,
            value_tol: 0.0,
            max_iters: 500,
            seed: 0,
        }
    }
}

impl SimplexOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.diameter_tol >= 0.0
            && self.value_tol >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid simplex coefficients: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best vertex and its value after every iteration, starting with the
    /// initial simplex.
    pub history: Vec<(Vec<f64>, f64)>,
}

/// Closed box `[lo, hi]` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            if *v < lo {
                *v = (lo + BOX_OFFSET).min(hi);
            } else if *v > hi {
                *v = (hi - BOX_OFFSET).max(lo);
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((v, lo), hi)| v >= lo && v <= hi)
    }
}

/// Simplex from `start` plus one vertex per axis offset by `step`, flipped
/// when the offset would leave `bounds`.
pub fn axis_simplex(start: &[f64], step: f64, bounds: Option<&Bounds>) -> Vec<Vec<f64>> {
    let mut out = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut v = start.to_vec();
        v[i] += step;
        if let Some(b) = bounds {
            if v[i] > b.hi[i] {
                v[i] = start[i] - step;
            }
            b.clamp(&mut v);
        }
        out.push(v);
    }
    out
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    // non-finite points are always the worst
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn combine(c: &[f64], x: &[f64], t: f64, bounds: Option<&Bounds>) -> Vec<f64> {
    let mut out: Vec<f64> = c.iter().zip(x).map(|(ci, xi)| ci + t * (xi - ci)).collect();
    if let Some(b) = bounds {
        b.clamp(&mut out);
    }
    out
}

/// Minimizes `f` from the given simplex (`n + 1` vertices of dimension `n`).
pub fn nelder_mead<F>(
    mut f: F,
    simplex: Vec<Vec<f64>>,
    bounds: Option<&Bounds>,
    opts: &SimplexOptions,
) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> f64,
{
    opts.validate()?;
    let n = simplex.first().map_or(0, |v| v.len());
    if n == 0 || simplex.len() != n + 1 || simplex.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidInput(
            "simplex needs n + 1 vertices of dimension n".into(),
        ));
    }
    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for mut v in simplex {
        if let Some(b) = bounds {
            b.clamp(&mut v);
        }
        let fv = f(&v);
        if !fv.is_finite() {
            return Err(Error::NonFiniteStart);
        }
        verts.push((v, fv));
    }
    let sort = |verts: &mut Vec<(Vec<f64>, f64)>| verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut verts);
    let mut history = vec![verts[0].clone()];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        let diameter = verts[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&verts[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = verts[n].1 - verts[0].1;
        if diameter < opts.diameter_tol || spread <= opts.value_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|i| verts[..n].iter().map(|(v, _)| v[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = verts[n].clone();
        let xr = combine(&centroid, &worst.0, -opts.reflection, bounds);
        let fr = eval(&mut f, &xr);

        if fr < verts[0].1 {
            let xe = combine(&centroid, &worst.0, -opts.reflection * opts.expansion, bounds);
            let fe = eval(&mut f, &xe);
            verts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < verts[n - 1].1 {
            verts[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = combine(&centroid, &xr, opts.contraction, bounds);
                let fc = eval(&mut f, &xc);
                (xc, fc)
            } else {
                let xc = combine(&centroid, &worst.0, opts.contraction, bounds);
                let fc = eval(&mut f, &xc);
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                verts[n] = (xc, fc);
            } else {
                let best = verts[0].0.clone();
                for vert in verts.iter_mut().skip(1) {
                    let x = combine(&best, &vert.0, opts.shrink, bounds);
                    let fx = eval(&mut f, &x);
                    *vert = (x, fx);
                }
            }
        }
        sort(&mut verts);
        history.push(verts[0].clone());
    }
    let (argmin, value) = verts.swap_remove(0);
    Ok(SimplexResult {
        argmin,
        value,
        iterations,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Bounds {
        Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0])
    }

    #[test]
    fn convex_quadratic_on_the_unit_box() {
        let f = |v: &[f64]| (v[0] - 0.3).powi(2) + (v[1] - 0.7).powi(2);
        let b = unit_box();
        let r = nelder_mead(f, axis_simplex(&[0.9, 0.1], 0.1, Some(&b)), Some(&b), &SimplexOptions::default())
            .unwrap();
        assert!(r.converged);
        assert!((r.argmin[0] - 0.3).abs() < 1e-6 && (r.argmin[1] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let f = |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2);
        let opts = SimplexOptions {
            max_iters: 5000,
            ..Default::default()
        };
        let r = nelder_mead(f, axis_simplex(&[-1.2, 1.0], 0.1, None), None, &opts).unwrap();
        assert!((r.argmin[0] - 1.0).abs() < 1e-4 && (r.argmin[1] - 1.0).abs() < 1e-4, "{:?}", r.argmin);
    }

    #[test]
    fn monotone_transform_leaves_the_path_unchanged() {
        let f = |v: &[f64]| (v[0] - 0.2).powi(2) + 3.0 * (v[1] - 0.6).powi(2) + v[0] * v[1];
        let g = |v: &[f64]| (f(v) + 1.0).ln();
        let s = axis_simplex(&[0.5, 0.5], 0.2, None);
        let opts = SimplexOptions::default();
        let a = nelder_mead(f, s.clone(), None, &opts).unwrap();
        let b = nelder_mead(g, s, None, &opts).unwrap();
        for i in 0..2 {
            assert!((a.argmin[i] - b.argmin[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn best_value_never_increases() {
        let f = |v: &[f64]| (v[0] * 3.0).sin() + (v[1] - 0.4).powi(2) * 4.0 + v[0] * v[0];
        let r = nelder_mead(f, axis_simplex(&[0.8, 0.8], 0.3, None), None, &SimplexOptions::default())
            .unwrap();
        assert!(r.history.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn non_finite_trial_points_are_rejected() {
        // undefined left of 0.25
        let f = |v: &[f64]| {
            if v[0] < 0.25 {
                f64::NAN
            } else {
                (v[0] - 0.25).powi(2) + (v[1] - 0.5).powi(2)
            }
        };
        let r = nelder_mead(f, axis_simplex(&[0.6, 0.6], 0.1, None), None, &SimplexOptions::default())
            .unwrap();
        assert!(r.value.is_finite());
        assert!(r.argmin[0] >= 0.25);
    }

    #[test]
    fn clamped_points_stay_inside() {
        let f = |v: &[f64]| -v[0] - v[1];
        let b = unit_box();
        let r = nelder_mead(f, axis_simplex(&[0.5, 0.5], 0.2, Some(&b)), Some(&b), &SimplexOptions::default())
            .unwrap();
        assert!(b.contains(&r.argmin));
        assert!(r.argmin[0] > 0.99 && r.argmin[1] > 0.99);
    }

    #[test]
    fn bad_coefficients_and_starts() {
        let f = |_: &[f64]| 0.0;
        let opts = SimplexOptions {
            expansion: 0.5,
            ..Default::default()
        };
        assert!(nelder_mead(f, axis_simplex(&[0.0], 1.0, None), None, &opts).is_err());
        let nan = |_: &[f64]| f64::NAN;
        assert!(matches!(
            nelder_mead(nan, axis_simplex(&[0.0], 1.0, None), None, &SimplexOptions::default()),
            Err(Error::NonFiniteStart)
        ));
    }
}
