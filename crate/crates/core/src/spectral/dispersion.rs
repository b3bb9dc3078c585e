use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Relative separation of the two `k⁴` branches below which they are treated as coincident.
pub const DEGENERACY_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The eight wavenumbers of one constant-stiffness interval at one frequency.
///
/// Roots `0..4` belong to the first `k⁴` branch, `4..8` to the second, each
/// ordered as `r·{1, −1, i, −i}` with `r` the principal fourth root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRoots {
    pub roots: [Complex64; 8],
    /// The two solutions of the quadratic in `k⁴`.
    pub branches: [Complex64; 2],
    pub degenerate: bool,
}

/// Coefficients `[c8, c4, c0]` of `c8·k⁸ + c4·k⁴ + c0`.
pub fn characteristic_coefficients(omega: f64, alpha_h: f64, p: &SystemParams) -> [Complex64; 3] {
    let w = omega;
    let c8 = Complex64::new(p.beta * alpha_h, 0.0);
    let c4 = Complex64::new(
        -(p.beta + alpha_h + p.gamma * p.gamma) * w * w,
        p.delta * w * alpha_h,
    );
    let c0 = Complex64::new(w.powi(4), -p.delta * w.powi(3));
    [c8, c4, c0]
}

/// `|c8 k⁸ + c4 k⁴ + c0|` relative to `max|c|·max(|k|⁸, 1)`.
pub fn relative_residual(k: Complex64, omega: f64, alpha_h: f64, p: &SystemParams) -> f64 {
    let [c8, c4, c0] = characteristic_coefficients(omega, alpha_h, p);
    let k4 = k * k * k * k;
    let value = c8 * k4 * k4 + c4 * k4 + c0;
    let scale = c8.norm().max(c4.norm()).max(c0.norm()) * k.norm().powi(8).max(1.0);
    value.norm() / scale
}

pub fn dispersion_roots(omega: f64, alpha_h: f64, p: &SystemParams) -> Result<DispersionRoots> {
    let [a, b, c] = characteristic_coefficients(omega, alpha_h, p);
    if ![a, b, c].iter().all(|z| z.is_finite()) || a == Complex64::ZERO {
        return Err(Error::NonFiniteCoefficients { omega });
    }
    // cancellation-free quadratic formula
    let sq = (b * b - 4.0 * a * c).sqrt();
    let sign = if (b.conj() * sq).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sign * sq);
    if q == Complex64::ZERO {
        return Err(Error::ZeroBranches { omega });
    }
    let z1 = q / a;
    let z2 = c / q;
    if z1 == Complex64::ZERO && z2 == Complex64::ZERO {
        return Err(Error::ZeroBranches { omega });
    }
    let degenerate = (z1 - z2).norm() < DEGENERACY_TOL * z1.norm().max(z2.norm());

    let mut roots = [Complex64::ZERO; 8];
    for (j, z) in [z1, z2].into_iter().enumerate() {
        let r = z.sqrt().sqrt();
        roots[4 * j] = r;
        roots[4 * j + 1] = -r;
        roots[4 * j + 2] = I * r;
        roots[4 * j + 3] = -I * r;
    }
    Ok(DispersionRoots {
        roots,
        branches: [z1, z2],
        degenerate,
    })
}
