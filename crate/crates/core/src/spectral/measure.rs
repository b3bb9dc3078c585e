use crate::error::{Error, Result};
use crate::model::{
    validate_params, DamageProfile, FrequencyGrid, LoadCase, MeasuredCase, MeasurementSet,
    SystemParams,
};

use super::assembly::{assemble, FactoredSystem};

/// Synthetic measurements plus the frequencies that had to be dropped.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub set: MeasurementSet,
    pub dropped: Vec<f64>,
}

/// Boundary slopes for every load case on `grid`, computed at the true
/// profile. A frequency where the solve fails is removed from the grid.
pub fn synthesize_measurements(
    p: &SystemParams,
    dp_true: &DamageProfile,
    grid: &FrequencyGrid,
    loads: &[LoadCase],
) -> Result<Synthesis> {
    validate_params(p, dp_true)?;
    if loads.is_empty() {
        return Err(Error::InvalidInput("at least one load case is required".into()));
    }
    for l in loads {
        l.validate()?;
    }

    let mut cases: Vec<MeasuredCase> = loads
        .iter()
        .map(|&load| MeasuredCase {
            load,
            m: Vec::with_capacity(grid.len()),
            g: Vec::with_capacity(grid.len()),
        })
        .collect();
    let mut drop = Vec::new();
    for (k, &w) in grid.omegas().iter().enumerate() {
        let sys = match assemble(w, p, dp_true).and_then(FactoredSystem::new) {
            Ok(s) => s,
            Err(e) if e.is_numerical() => {
                log::warn!("dropping omega = {w} from the synthetic grid: {e}");
                drop.push(k);
                continue;
            }
            Err(e) => return Err(e),
        };
        for case in &mut cases {
            let r = sys.solve(&case.load);
            case.m.push(r.boundary_slopes());
            case.g.push(case.load.moments());
        }
    }
    if drop.len() == grid.len() {
        return Err(Error::EmptyFrequencySet);
    }
    let dropped = drop.iter().map(|&k| grid.omegas()[k]).collect();
    Ok(Synthesis {
        set: MeasurementSet {
            grid: grid.without(&drop)?,
            beta: p.beta,
            cases,
        },
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::solve_frf;

    fn rel(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn shape_and_inputs() {
        let p = SystemParams::baseline();
        let grid = FrequencyGrid::default_for(&p).unwrap();
        let loads = [LoadCase::real(0.0, 1.0), LoadCase::real(1.0, 1.0)];
        let s = synthesize_measurements(&p, &DamageProfile::baseline(), &grid, &loads).unwrap();
        assert!(s.dropped.is_empty());
        s.set.validate().unwrap();
        assert_eq!(s.set.cases.len(), 2);
        assert_eq!(s.set.cases[1].m.len(), 40);
        assert_eq!(s.set.cases[1].g[3], loads[1].moments());
        assert_eq!(s.set.beta, 1.0);
    }

    #[test]
    fn undamaged_reference_is_position_free() {
        let p = SystemParams::baseline();
        let grid = FrequencyGrid::default_for(&p).unwrap();
        let loads = [LoadCase::real(0.0, 1.0)];
        let a = synthesize_measurements(&p, &DamageProfile::undamaged(0.2, 0.05), &grid, &loads)
            .unwrap();
        let b = synthesize_measurements(&p, &DamageProfile::undamaged(0.66, 0.05), &grid, &loads)
            .unwrap();
        for (k, (x, y)) in a.set.cases[0].m.iter().zip(&b.set.cases[0].m).enumerate() {
            // rounding is amplified by the conditioning next to a resonance
            let w = grid.omegas()[k];
            let cond = assemble(w, &p, &DamageProfile::undamaged(0.2, 0.05))
                .unwrap()
                .condition();
            let tol = 1e-12f64.max(cond * 1e-16);
            assert!(rel(x[0], y[0]) < tol && rel(x[1], y[1]) < tol, "omega {w}, cond {cond:e}");
        }
    }

    #[test]
    fn symmetric_load_mirrors_measurements() {
        let p = SystemParams::baseline();
        let grid = FrequencyGrid::default_for(&p).unwrap();
        let loads = [LoadCase::real(1.0, 1.0)];
        let dp = DamageProfile::baseline();
        let a = synthesize_measurements(&p, &dp, &grid, &loads).unwrap();
        // oracle: direct solves at the mirrored profile
        for (k, &w) in grid.omegas().iter().enumerate() {
            let mirrored = solve_frf(w, &p, &dp.mirrored(), &loads[0])
                .unwrap()
                .boundary_slopes();
            let m = a.set.cases[0].m[k];
            assert!(rel(m[0], -mirrored[1]) < 1e-9, "omega {w}");
            assert!(rel(m[1], -mirrored[0]) < 1e-9, "omega {w}");
        }
    }
}
