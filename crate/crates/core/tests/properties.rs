//! Properties of the model and the functional that hold for any configuration.

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pem_detect::cli::config::RunConfig;
use pem_detect::cli::verify::frf_discrepancy;
use pem_detect::detect::scan::linspace;
use pem_detect::detect::{
    evaluate_functional, functional_gradient, identify, scan_surface, IdentifyOptions, ScanAxes,
    SyntheticExperiment, Weighting,
};
use pem_detect::model::{DamageProfile, FrequencyGrid, LoadCase, MeasurementSet, ParameterPoint, SystemParams};
use pem_detect::oracle::{fe_assemble, fe_frf, FeMesh};
use pem_detect::spectral::{solve_frf, synthesize_measurements};

const EPS: f64 = 0.05;

fn synth(p: &SystemParams, truth: &DamageProfile, loads: &[LoadCase]) -> MeasurementSet {
    let grid = FrequencyGrid::default_for(p).unwrap();
    synthesize_measurements(p, truth, &grid, loads).unwrap().set
}

fn e(set: &MeasurementSet, d: f64, x: f64) -> f64 {
    evaluate_functional(&ParameterPoint::new(d, x, set.beta), set, &SystemParams::baseline(), EPS).unwrap()
}

#[test]
fn identification_is_deterministic() {
    let set = synth(&SystemParams::baseline(), &DamageProfile::baseline(), &[LoadCase::real(0.0, 1.0)]);
    let opts = IdentifyOptions::default();
    let a = identify(&set, &SystemParams::baseline(), EPS, &opts).unwrap();
    let b = identify(&set, &SystemParams::baseline(), EPS, &opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scaling_the_data_scales_the_functional(re in -3.0..3.0f64, im in -3.0..3.0f64, d in 0.1..0.95f64, x in 0.1..0.9f64) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 0.05);
        let set = synth(&SystemParams::baseline(), &DamageProfile::baseline(), &[LoadCase::real(1.0, 1.0)]);
        let a = e(&set, d, x);
        let b = e(&set.scaled(c), d, x);
        prop_assert!((b - c.norm_sqr() * a).abs() <= 1e-9 * b.abs().max(c.norm_sqr() * a));
    }
}

#[test]
fn scaling_keeps_the_grid_minimizer() {
    let set = synth(&SystemParams::baseline(), &DamageProfile::new(0.6, 0.35, EPS), &[LoadCase::real(0.0, 1.0)]);
    let scaled = set.scaled(Complex64::new(0.0, 7.5));
    let argmin = |s: &MeasurementSet| {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for d in linspace(0.2, 1.0, 9) {
            for x in linspace(0.15, 0.85, 15) {
                let v = e(s, d, x);
                if v < best.0 {
                    best = (v, d, x);
                }
            }
        }
        (best.1, best.2)
    };
    assert_eq!(argmin(&set), argmin(&scaled));
}

/// The functional has poles where the condensed stiffness is singular at a grid
/// frequency, so the probe works in the asymptotic range of small steps.
#[test]
fn functional_is_continuous() {
    let set = synth(&SystemParams::baseline(), &DamageProfile::baseline(), &[LoadCase::real(0.0, 1.0), LoadCase::real(1.0, 1.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let (d, x) = (rng.random_range(0.1..0.9), rng.random_range(0.1..0.9));
        let base = e(&set, d, x);
        let mut prev = f64::INFINITY;
        let mut first = None;
        for k in 0..4 {
            let h = 1e-5 / f64::from(1 << k);
            let jump = (e(&set, d + h, x + h) - base).abs();
            assert!(jump < prev, "no decrease at ({d}, {x}), h = {h}");
            first.get_or_insert(jump);
            prev = jump;
        }
        // three halvings of a Lipschitz step shrink the jump about eightfold
        assert!(prev < 0.25 * first.unwrap(), "({d}, {x}): {prev:e} vs {first:?}");
    }
}

#[test]
fn decoupled_functional_is_flat() {
    let p = SystemParams::baseline().with_gamma(0.0);
    let set = synth(&p, &DamageProfile::baseline(), &[LoadCase::real(0.0, 1.0)]);
    let scale = set.input_scale();
    for (d, x) in [(0.3, 0.4), (0.8, 0.7), (0.5, 0.2)] {
        let g = functional_gradient(&ParameterPoint::new(d, x, 1.0), &set, &p, EPS, 1e-4).unwrap();
        assert!(g[0].abs() < 1e-8 * scale && g[1].abs() < 1e-8 * scale, "{g:?}");
    }
}

#[test]
fn finite_elements_converge_at_least_quadratically() {
    let (p, dp) = (SystemParams::baseline(), DamageProfile::baseline());
    let load = LoadCase::real(1.0, 1.0);
    let err = |n: usize, w: f64| {
        let exact = solve_frf(w, &p, &dp, &load).unwrap().boundary_slopes();
        let fe = fe_frf(&fe_assemble(&p, &dp, &FeMesh::aligned(n, &p, &dp).unwrap()).unwrap(), w, &load).unwrap();
        ((exact[0] - fe[0]).norm() + (exact[1] - fe[1]).norm()) / (exact[0].norm() + exact[1].norm())
    };
    for w in [7.3, 23.0, 61.5] {
        let (e1, e2) = (err(20, w), err(40, w));
        let order = (e1 / e2).log2();
        assert!(order >= 2.0, "omega {w}: errors {e1:e}, {e2:e}, order {order:.2}");
    }
}

#[test]
fn finite_elements_match_the_spectral_model() {
    let cfg = RunConfig::default();
    let fine = frf_discrepancy(&cfg, 200).unwrap();
    let coarse = frf_discrepancy(&cfg, 50).unwrap();
    assert!(fine < 0.01, "{fine}");
    assert!(coarse < 0.04, "{coarse}");
    assert!(fine <= coarse);
}

#[test]
fn position_is_not_mirror_symmetric_for_one_sided_load() {
    let set = synth(&SystemParams::baseline(), &DamageProfile::baseline(), &[LoadCase::real(0.0, 1.0)]);
    let (a, b) = (e(&set, 0.5, 0.8), e(&set, 0.5, 0.2));
    assert!((a - b).abs() >= 1e-3 * a.max(b), "{a:e} vs {b:e}");
    // away from the truth the symmetric part dominates, but the gap stays visible
    for (d, x) in [(0.3, 0.3), (0.7, 0.6), (0.9, 0.15)] {
        let (a, b) = (e(&set, d, x), e(&set, d, 1.0 - x));
        assert!((a - b).abs() >= 1e-5 * a.max(b), "({d}, {x}): {a:e} vs {b:e}");
    }
}

#[test]
fn mirrored_truth_gives_mirrored_data() {
    let p = SystemParams::baseline();
    let load = [LoadCase::real(1.0, 1.0)];
    let a = synth(&p, &DamageProfile::baseline(), &load);
    let b = synth(&p, &DamageProfile::baseline().mirrored(), &load);
    for (u, v) in a.cases[0].m.iter().zip(&b.cases[0].m) {
        assert_relative_eq!((u[0] + v[1]).norm(), 0.0, epsilon = 1e-9 * u[0].norm());
        assert_relative_eq!((u[1] + v[0]).norm(), 0.0, epsilon = 1e-9 * u[1].norm());
    }
}

#[test]
fn scan_of_mirrored_truth_is_mirrored() {
    let p = SystemParams::baseline();
    let grid = FrequencyGrid::default_for(&p).unwrap();
    let axes = ScanAxes {
        d: linspace(0.2, 1.0, 5),
        x: linspace(0.1, 0.9, 9),
        beta: vec![0.9, 1.1],
    };
    let run = |truth: DamageProfile| {
        let exp = SyntheticExperiment {
            params: p,
            truth,
            grid: grid.clone(),
            loads: vec![LoadCase::real(1.0, 1.0)],
        };
        scan_surface(&exp, &p, EPS, axes.clone(), 1.0, Weighting::None).unwrap()
    };
    let (a, b) = (run(DamageProfile::baseline()), run(DamageProfile::baseline().mirrored()));
    let floor = 1e-12 * synth(&p, &DamageProfile::baseline(), &[LoadCase::real(1.0, 1.0)]).input_scale();
    let n = axes.x.len();
    for bi in 0..axes.beta.len() {
        for i in 0..axes.d.len() {
            for j in 0..n {
                let (u, v) = (10f64.powf(a.at(bi, i, j)), 10f64.powf(b.at(bi, i, n - 1 - j)));
                assert!((u - v).abs() <= 1e-8 * u.max(v) + floor, "cell ({bi}, {i}, {j}): {u:e} vs {v:e}");
            }
        }
    }
    assert_eq!(a.areas, b.areas);
}
