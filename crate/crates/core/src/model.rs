//! Domain types shared by every other module: constitutive constants, the
//! rectangular damage notch, load cases, frequency grids, measurement sets
//! and identification results.
//!
//! All quantities are dimensionless. The beam occupies `s ∈ [0, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Upper bound accepted for the damaged-zone half-width.
pub const MAX_HALF_WIDTH: f64 = 0.25;

/// Constitutive constants of the coupled beam / transmission-line system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Baseline bending stiffness.
    pub alpha0: f64,
    /// Line stiffness (inductance derived), the electric tuning knob.
    pub beta: f64,
    /// Piezoelectric coupling.
    pub gamma: f64,
    /// Line resistance.
    #[serde(default)]
    pub delta: f64,
}

impl SystemParams {
    pub const fn new(alpha0: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self {
            alpha0,
            beta,
            gamma,
            delta,
        }
    }

    /// `α₀ = 1, β = 1, γ = 1/20, δ = 0`.
    pub const fn baseline() -> Self {
        Self::new(1.0, 1.0, 0.05, 0.0)
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        let mut check = |field, value: f64, ok: bool, bound: &str| {
            if !ok || !value.is_finite() {
                out.push(Violation {
                    field,
                    value,
                    bound: bound.to_string(),
                });
            }
        };
        check("alpha0", self.alpha0, self.alpha0 > 0.0, "alpha0 > 0");
        check("beta", self.beta, self.beta > 0.0, "beta > 0");
        check("gamma", self.gamma, self.gamma >= 0.0, "gamma >= 0");
        check("delta", self.delta, self.delta >= 0.0, "delta >= 0");
    }

    /// Undamped resonances of the undamaged, uniformly stiff system below
    /// `max_omega`, ascending. Each sine mode `sin(nπs)` couples the two
    /// fields into a pair of frequencies.
    pub fn undamaged_resonances(&self, max_omega: f64) -> Vec<f64> {
        let a = self.alpha0;
        let b = self.beta;
        let sum = a + b + self.gamma * self.gamma;
        let disc = (sum * sum - 4.0 * a * b).max(0.0).sqrt();
        let mut out = Vec::new();
        for n in 1.. {
            let q4 = (n as f64 * PI).powi(4);
            let lo = (q4 * (sum - disc) / 2.0).sqrt();
            let hi = (q4 * (sum + disc) / 2.0).sqrt();
            if lo > max_omega {
                break;
            }
            out.push(lo);
            if hi <= max_omega {
                out.push(hi);
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Rectangular stiffness notch: `α = α₀·d` on `(x − eps, x + eps)`, `α₀` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageProfile {
    /// Stiffness retention inside the damaged zone.
    pub d: f64,
    /// Centre of the damaged zone.
    pub x: f64,
    /// Half-width of the damaged zone; known to the experimenter.
    pub eps: f64,
}

impl DamageProfile {
    pub const fn new(d: f64, x: f64, eps: f64) -> Self {
        Self { d, x, eps }
    }

    /// `d = 0.5, x = 0.8, eps = 0.05`.
    pub const fn baseline() -> Self {
        Self::new(0.5, 0.8, 0.05)
    }

    pub fn undamaged(x: f64, eps: f64) -> Self {
        Self::new(1.0, x, eps)
    }

    pub fn left(&self) -> f64 {
        self.x - self.eps
    }

    pub fn right(&self) -> f64 {
        self.x + self.eps
    }

    /// The profile reflected through `s = 1/2`.
    pub fn mirrored(&self) -> Self {
        Self::new(self.d, 1.0 - self.x, self.eps)
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        let mut check = |field, value: f64, ok: bool, bound: String| {
            if !ok || !value.is_finite() {
                out.push(Violation {
                    field,
                    value,
                    bound,
                });
            }
        };
        check("d", self.d, self.d > 0.0, "d > 0".into());
        check("d", self.d, self.d <= 1.0, "d <= 1".into());
        check("eps", self.eps, self.eps > 0.0, "eps > 0".into());
        check(
            "eps",
            self.eps,
            self.eps <= MAX_HALF_WIDTH,
            format!("eps <= {MAX_HALF_WIDTH}"),
        );
        check(
            "x",
            self.x,
            self.x > self.eps,
            format!("x > eps = {}", self.eps),
        );
        check(
            "x",
            self.x,
            self.x < 1.0 - self.eps,
            format!("x < 1 - eps = {}", 1.0 - self.eps),
        );
    }
}

/// Checks every invariant of `p` and `dp`; on failure lists all violations.
pub fn validate_params(p: &SystemParams, dp: &DamageProfile) -> Result<()> {
    let mut v = Vec::new();
    p.violations(&mut v);
    dp.violations(&mut v);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(v))
    }
}

/// Bending stiffness `α(s)`. The two interface points take the outside value.
pub fn stiffness_at(s: f64, p: &SystemParams, dp: &DamageProfile) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::AbscissaOutOfRange(s));
    }
    if s > dp.left() && s < dp.right() {
        Ok(p.alpha0 * dp.d)
    } else {
        Ok(p.alpha0)
    }
}

/// A point of the full parameter space: `(d, x)` to identify and the tuning `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub d: f64,
    pub x: f64,
    pub beta: f64,
}

impl ParameterPoint {
    pub const fn new(d: f64, x: f64, beta: f64) -> Self {
        Self { d, x, beta }
    }

    pub fn pi1(&self) -> [f64; 2] {
        [self.d, self.x]
    }

    /// True when `(d, x)` lies in `(0, 1] × (eps, 1 − eps)` and `β > 0`.
    pub fn is_admissible(&self, eps: f64) -> bool {
        self.d > 0.0 && self.d <= 1.0 && self.x > eps && self.x < 1.0 - eps && self.beta > 0.0
    }

    pub fn profile(&self, eps: f64) -> DamageProfile {
        DamageProfile::new(self.d, self.x, eps)
    }
}

/// Electric bending moments applied at the two ends, flat in frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    #[serde(with = "complex_parts")]
    pub mu0: Complex64,
    #[serde(with = "complex_parts")]
    pub mu1: Complex64,
}

impl LoadCase {
    pub fn new(mu0: Complex64, mu1: Complex64) -> Result<Self> {
        let lc = Self { mu0, mu1 };
        lc.validate()?;
        Ok(lc)
    }

    pub fn real(mu0: f64, mu1: f64) -> Self {
        Self {
            mu0: Complex64::new(mu0, 0.0),
            mu1: Complex64::new(mu1, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu0 == Complex64::ZERO && self.mu1 == Complex64::ZERO {
            return Err(Error::InvalidInput(
                "load case must have a nonzero moment at one end at least".into(),
            ));
        }
        if !(self.mu0.is_finite() && self.mu1.is_finite()) {
            return Err(Error::InvalidInput("load case moments must be finite".into()));
        }
        Ok(())
    }

    pub fn moments(&self) -> [Complex64; 2] {
        [self.mu0, self.mu1]
    }
}

/// Generalized forces dual to `(φ′(0), φ′(1))` produced by end moments `(μ₀, μ₁)`.
///
/// The outward normal at `s = 0` points in `−s`, so the left moment enters with
/// a minus sign.
pub fn moments_to_forces(g: [Complex64; 2]) -> [Complex64; 2] {
    [-g[0], g[1]]
}

/// Strictly increasing list of positive angular frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidInput("frequency grid is empty".into()));
        }
        if omegas.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidInput(
                "frequencies must be finite and positive".into(),
            ));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self { omegas })
    }

    /// `count` uniform frequencies on `[lo, hi]`, each pushed at least
    /// `guard_fraction` of the local modal spacing away from the undamaged
    /// resonances of `p`. With `δ > 0` the grid is left uniform.
    pub fn guarded(
        lo: f64,
        hi: f64,
        count: usize,
        p: &SystemParams,
        guard_fraction: f64,
    ) -> Result<Self> {
        if count == 0 || !(lo > 0.0) || !(hi >= lo) {
            return Err(Error::InvalidInput(format!(
                "bad grid spec: [{lo}, {hi}] with {count} points"
            )));
        }
        let step = if count > 1 {
            (hi - lo) / (count - 1) as f64
        } else {
            0.0
        };
        let mut omegas: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
        if p.delta == 0.0 && guard_fraction > 0.0 {
            let res = p.undamaged_resonances(hi * 1.5 + 1.0);
            for w in omegas.iter_mut() {
                *w = push_off_resonance(*w, &res, guard_fraction);
            }
            omegas.sort_by(f64::total_cmp);
            omegas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        }
        Self::new(omegas)
    }

    /// Default grid: 40 points on `[1, 120]`, guard 2 % of the modal spacing.
    pub fn default_for(p: &SystemParams) -> Result<Self> {
        Self::guarded(1.0, 120.0, 40, p, 0.02)
    }

    /// Smallest distance, in units of local modal spacing, from any grid
    /// point to an undamaged resonance of `p`.
    pub fn guard_margin(&self, p: &SystemParams) -> f64 {
        let hi = self.omegas.last().copied().unwrap_or(1.0);
        let res = p.undamaged_resonances(hi * 1.5 + 1.0);
        self.omegas
            .iter()
            .map(|&w| {
                let (dist, spacing) = nearest_resonance(w, &res);
                dist / spacing
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// The same grid without the frequencies at `drop` (sorted indices).
    pub fn without(&self, drop: &[usize]) -> Result<Self> {
        let omegas = self
            .omegas
            .iter()
            .enumerate()
            .filter(|(k, _)| !drop.contains(k))
            .map(|(_, w)| *w)
            .collect();
        Self::new(omegas)
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.omegas
    }
}

// (distance to nearest resonance, local modal spacing around it)
fn nearest_resonance(w: f64, res: &[f64]) -> (f64, f64) {
    let mut best = (f64::INFINITY, 1.0);
    for (j, &r) in res.iter().enumerate() {
        let below = if j == 0 { r } else { r - res[j - 1] };
        let above = res.get(j + 1).map_or(below, |n| n - r);
        let dist = (w - r).abs();
        if dist < best.0 {
            best = (dist, below.min(above));
        }
    }
    best
}

fn push_off_resonance(w: f64, res: &[f64], fraction: f64) -> f64 {
    let mut w = w;
    // a push may land inside the guard of the neighbour; a few passes settle it
    for _ in 0..4 {
        let Some((j, r)) = res
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| (a.1 - w).abs().total_cmp(&(b.1 - w).abs()))
        else {
            return w;
        };
        let below = if j == 0 { r } else { r - res[j - 1] };
        let above = res.get(j + 1).map_or(below, |n| n - r);
        let guard = fraction * below.min(above);
        if (w - r).abs() >= guard {
            return w;
        }
        w = if w >= r { r + guard } else { r - guard };
    }
    w
}

/// Electric response recorded for one load case across the frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredCase {
    pub load: LoadCase,
    /// `(φ′(0), φ′(1))` per frequency.
    pub m: Vec<[Complex64; 2]>,
    /// Applied end moments `(μ₀, μ₁)` per frequency.
    pub g: Vec<[Complex64; 2]>,
}

/// Boundary electric responses for every load case on one frequency grid.
/// The input dual to the unmeasured degrees of freedom is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub grid: FrequencyGrid,
    /// Line tuning in force when the data were recorded.
    pub beta: f64,
    pub cases: Vec<MeasuredCase>,
}

impl MeasurementSet {
    pub fn validate(&self) -> Result<()> {
        let k = self.grid.len();
        if self.cases.is_empty() {
            return Err(Error::InvalidInput("measurement set has no load cases".into()));
        }
        for (i, c) in self.cases.iter().enumerate() {
            if c.m.len() != k || c.g.len() != k {
                return Err(Error::InvalidInput(format!(
                    "load case {i}: expected {k} samples, found m = {}, g = {}",
                    c.m.len(),
                    c.g.len()
                )));
            }
        }
        Ok(())
    }

    /// Sum over cases and frequencies of `|g★|²`, the natural scale of the functional.
    pub fn input_scale(&self) -> f64 {
        self.cases
            .iter()
            .flat_map(|c| c.g.iter())
            .map(|g| g[0].norm_sqr() + g[1].norm_sqr())
            .sum()
    }

    /// Keeps only the load cases selected by `keep`.
    pub fn select_cases(&self, keep: &[usize]) -> Self {
        Self {
            grid: self.grid.clone(),
            beta: self.beta,
            cases: keep.iter().map(|&i| self.cases[i].clone()).collect(),
        }
    }

    /// Multiplies every response and input by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for case in &mut out.cases {
            for v in case.m.iter_mut().chain(case.g.iter_mut()) {
                v[0] *= c;
                v[1] *= c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIters,
    /// Damage too small for the position to be meaningful.
    DegenerateX,
    /// The max–min alternation stopped making progress.
    NonConvergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Start,
    /// Simplex run over `(d, x)` at fixed `β`.
    Minimize,
    /// Scalar search over `β` at fixed `(d, x)`.
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Start index for multi-start runs, outer iteration for max–min tuning.
    pub run: usize,
    pub iteration: usize,
    pub step: Step,
    pub point: ParameterPoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub d_hat: f64,
    pub x_hat: f64,
    pub beta_used: f64,
    pub e_final: f64,
    pub status: Status,
    pub trace: Vec<TraceEntry>,
}

mod complex_parts {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Parts { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(Complex64::new(p.re, p.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_configuration_validates() {
        assert!(validate_params(&SystemParams::baseline(), &DamageProfile::baseline()).is_ok());
    }

    #[test]
    fn position_inside_left_margin_is_rejected() {
        let err = validate_params(&SystemParams::baseline(), &DamageProfile::new(0.5, 0.03, 0.05))
            .unwrap_err();
        match err {
            Error::InvalidParams(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].field, "x");
                assert!(v[0].bound.contains("x > eps"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn retention_above_one_is_rejected() {
        let err = validate_params(&SystemParams::baseline(), &DamageProfile::new(1.2, 0.8, 0.05))
            .unwrap_err();
        let Error::InvalidParams(v) = err else {
            panic!()
        };
        assert_eq!(v[0].field, "d");
        assert!(v[0].bound.contains("d <= 1"));
    }

    #[test]
    fn all_violations_are_listed() {
        let p = SystemParams::new(-1.0, 0.0, -0.1, -1.0);
        let dp = DamageProfile::new(0.0, 0.99, 0.3);
        let Error::InvalidParams(v) = validate_params(&p, &dp).unwrap_err() else {
            panic!()
        };
        let fields: Vec<_> = v.iter().map(|v| v.field).collect();
        for f in ["alpha0", "beta", "gamma", "delta", "d", "eps", "x"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn stiffness_profile() {
        let p = SystemParams::baseline();
        let dp = DamageProfile::baseline();
        assert_eq!(stiffness_at(0.8, &p, &dp).unwrap(), 0.5);
        assert_eq!(stiffness_at(0.1, &p, &dp).unwrap(), 1.0);
        // interfaces take the outside value
        assert_eq!(stiffness_at(dp.left(), &p, &dp).unwrap(), 1.0);
        assert_eq!(stiffness_at(dp.right(), &p, &dp).unwrap(), 1.0);
        assert!(matches!(
            stiffness_at(1.5, &p, &dp),
            Err(Error::AbscissaOutOfRange(_))
        ));
        let intact = DamageProfile::undamaged(0.4, 0.05);
        for s in [0.0, 0.36, 0.4, 0.44, 1.0] {
            assert_eq!(stiffness_at(s, &p, &intact).unwrap(), p.alpha0);
        }
    }

    #[test]
    fn stiffness_has_exactly_two_jumps() {
        let p = SystemParams::baseline();
        let dp = DamageProfile::new(0.3, 0.5, 0.1);
        let n = 1000;
        let vals: Vec<f64> = (0..=n)
            .map(|i| stiffness_at(i as f64 / n as f64 + 1e-7 * (i < n) as u8 as f64, &p, &dp).unwrap())
            .collect();
        let jumps = vals.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(jumps, 2);
    }

    #[test]
    fn undamaged_resonances_pair_up_around_sine_modes() {
        let p = SystemParams::baseline();
        let r = p.undamaged_resonances(120.0);
        assert_eq!(r.len(), 6);
        for n in 1..=3 {
            let w0 = (n as f64 * PI).powi(2);
            let lo = r[2 * (n - 1)];
            let hi = r[2 * (n - 1) + 1];
            assert!(lo < w0 && hi > w0);
            // symbol determinant vanishes
            let q4 = w0 * w0;
            for w in [lo, hi] {
                let det = (q4 - w * w) * (q4 - w * w) - p.gamma * p.gamma * w * w * q4;
                assert!(det.abs() < 1e-8 * q4 * q4, "{det}");
            }
        }
    }

    #[test]
    fn default_grid_respects_guard() {
        let p = SystemParams::baseline();
        let g = FrequencyGrid::default_for(&p).unwrap();
        assert_eq!(g.len(), 40);
        assert!(g.guard_margin(&p) >= 0.02 - 1e-12);
        assert!(g.omegas()[0] >= 1.0 && *g.omegas().last().unwrap() <= 120.0 + 1.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(FrequencyGrid::new(vec![]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn load_case_needs_a_nonzero_moment() {
        assert!(LoadCase::new(Complex64::ZERO, Complex64::ZERO).is_err());
        assert!(LoadCase::new(Complex64::ZERO, Complex64::ONE).is_ok());
    }
}
