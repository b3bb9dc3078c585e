//! Exact dynamic stiffness of one constant-stiffness interval.
//!
//! Mechanical quantities are carried with a quarter-period phase, `ũ = i·u`
//! and mechanical forces multiplied by `i`. In these variables the coupled
//! operator is formally symmetric, so element and global matrices are complex
//! symmetric. Electric quantities are untouched.
//!
//! Nodal ordering per element: `[ũ, ũ′, φ, φ′]` at `a`, then the same at `b`.
//! Dual forces are the outward boundary terms of the symmetric weak form:
//! `∓(αũ‴ + ωγφ′)`, `±αũ″`, `∓(βφ‴ + ωγũ′)`, `±βφ″` (upper sign at `b`).
//! At the outer ends, where `φ = ũ = 0`, the moment duals coincide with the
//! physical `M` and `μ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{condition1, CMatrix, Lu};
use crate::model::SystemParams;

use super::dispersion::{dispersion_roots, DispersionRoots};

/// Condition estimate of the coefficient map above which an element is rejected.
pub const MAX_ELEMENT_CONDITION: f64 = 1e13;

const MAX_DEGENERACY_BUMPS: i32 = 4;

#[derive(Debug, Clone)]
pub struct ElementMatrix {
    pub a: f64,
    pub b: f64,
    pub alpha_h: f64,
    /// 8×8, maps nodal kinematics to dual nodal forces.
    pub k: CMatrix,
    /// Condition estimate of the coefficient-to-kinematics map.
    pub condition: f64,
}

/// Modal amplitude `(Ũ, Φ)` spanning the kernel of the symbol at wavenumber `k`.
fn mode_vector(
    k: Complex64,
    branch: usize,
    omega: f64,
    alpha_h: f64,
    p: &SystemParams,
) -> (Complex64, Complex64) {
    if p.gamma == 0.0 {
        // decoupled: the branches are ordered by `dispersion_roots`, pick by residual
        return decoupled_vector(k, branch, omega, alpha_h, p);
    }
    let k2 = k * k;
    let k4 = k2 * k2;
    let wg = omega * p.gamma;
    let mech = alpha_h * k4 - omega * omega;
    let elec = p.beta * k4 + Complex64::new(-omega * omega, omega * p.delta);
    let from_first = (wg * k2, -mech);
    let from_second = (elec, -wg * k2);
    let n1 = from_first.0.norm_sqr() + from_first.1.norm_sqr();
    let n2 = from_second.0.norm_sqr() + from_second.1.norm_sqr();
    let (u, f) = if n1 >= n2 { from_first } else { from_second };
    let n = (u.norm_sqr() + f.norm_sqr()).sqrt();
    (u / n, f / n)
}

fn decoupled_vector(
    k: Complex64,
    branch: usize,
    omega: f64,
    alpha_h: f64,
    p: &SystemParams,
) -> (Complex64, Complex64) {
    let k4 = k * k * k * k;
    let mech = (alpha_h * k4 - omega * omega).norm() / (alpha_h * k4.norm()).max(omega * omega);
    let elec = (p.beta * k4 + Complex64::new(-omega * omega, omega * p.delta)).norm()
        / (p.beta * k4.norm()).max(omega * omega);
    // with equal stiffnesses both residuals vanish; split by branch index
    let is_mech = if (mech - elec).abs() < 1e-12 {
        branch == 0
    } else {
        mech < elec
    };
    if is_mech {
        (Complex64::ONE, Complex64::ZERO)
    } else {
        (Complex64::ZERO, Complex64::ONE)
    }
}

/// Roots for `(omega, alpha_h)`, nudging `β` off an exactly repeated branch
/// when the fields are coupled. Returns the roots and the `β` actually used.
fn usable_roots(omega: f64, alpha_h: f64, p: &SystemParams) -> Result<(DispersionRoots, f64)> {
    let mut roots = dispersion_roots(omega, alpha_h, p)?;
    let mut beta = p.beta;
    if !roots.degenerate || p.gamma == 0.0 {
        return Ok((roots, beta));
    }
    for bump in 0..MAX_DEGENERACY_BUMPS {
        beta = p.beta * (1.0 + 1e-9 * 10f64.powi(bump));
        roots = dispersion_roots(omega, alpha_h, &p.with_beta(beta))?;
        if !roots.degenerate {
            log::warn!(
                "repeated dispersion branch at omega = {omega}, alpha = {alpha_h}; beta perturbed to {beta}"
            );
            return Ok((roots, beta));
        }
    }
    Ok((roots, beta))
}

pub fn element_matrix(
    interval: (f64, f64),
    omega: f64,
    alpha_h: f64,
    p: &SystemParams,
) -> Result<ElementMatrix> {
    let (a, b) = interval;
    if !(b > a) || !(omega > 0.0) || !(alpha_h > 0.0) || !(p.beta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "element needs b > a, omega > 0, alpha > 0, beta > 0 (got [{a}, {b}], {omega}, {alpha_h}, {})",
            p.beta
        )));
    }
    let (roots, beta) = usable_roots(omega, alpha_h, p)?;
    let p = p.with_beta(beta);
    let wg = omega * p.gamma;

    let mut g = CMatrix::zeros(8, 8);
    let mut f = CMatrix::zeros(8, 8);
    for (j, &k) in roots.roots.iter().enumerate() {
        let (u, phi) = mode_vector(k, j / 4, omega, alpha_h, &p);
        // anchor growing exponentials at the far end so every entry stays bounded
        let anchor = if k.re > 0.0 { b } else { a };
        let ea = (k * (a - anchor)).exp();
        let eb = (k * (b - anchor)).exp();

        let k2 = k * k;
        let k3 = k2 * k;
        let shear = alpha_h * k3 * u + wg * k * phi;
        let moment = alpha_h * k2 * u;
        let e_shear = p.beta * k3 * phi + wg * k * u;
        let e_moment = p.beta * k2 * phi;

        let kin = [u, k * u, phi, k * phi];
        let dual = [shear, -moment, e_shear, -e_moment];
        for r in 0..4 {
            g[(r, j)] = kin[r] * ea;
            g[(r + 4, j)] = kin[r] * eb;
            f[(r, j)] = dual[r] * ea;
            f[(r + 4, j)] = -dual[r] * eb;
        }
    }

    let gt = g.transpose();
    let lu = Lu::new(gt.clone()).ok_or(Error::ElementConditioning {
        a,
        b,
        omega,
        condition: f64::INFINITY,
    })?;
    let condition = condition1(&gt, &lu);
    if !(condition < MAX_ELEMENT_CONDITION) {
        return Err(Error::ElementConditioning {
            a,
            b,
            omega,
            condition,
        });
    }
    // K = F·G⁻¹  ⇔  Gᵀ·Kᵀ = Fᵀ
    let k = lu.solve(&f.transpose()).transpose();
    Ok(ElementMatrix {
        a,
        b,
        alpha_h,
        k,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{asymmetry, frobenius};
    use proptest::prelude::*;

    const MECH: [usize; 4] = [0, 1, 4, 5];
    const ELEC: [usize; 4] = [2, 3, 6, 7];

    #[test]
    fn static_limit_matches_euler_beam() {
        let p = SystemParams::new(1.0, 1.3, 0.0, 0.0);
        let (a, b) = (0.2, 0.7);
        let len: f64 = b - a;
        let alpha = 0.8;
        let e = element_matrix((a, b), 1e-3, alpha, &p).unwrap();
        let stat = [
            [12.0 / len.powi(3), 6.0 / len.powi(2), -12.0 / len.powi(3), 6.0 / len.powi(2)],
            [6.0 / len.powi(2), 4.0 / len, -6.0 / len.powi(2), 2.0 / len],
            [-12.0 / len.powi(3), -6.0 / len.powi(2), 12.0 / len.powi(3), -6.0 / len.powi(2)],
            [6.0 / len.powi(2), 2.0 / len, -6.0 / len.powi(2), 4.0 / len],
        ];
        for (r, &i) in MECH.iter().enumerate() {
            for (c, &j) in MECH.iter().enumerate() {
                let expect = alpha * stat[r][c];
                let got = e.k[(i, j)];
                assert!(
                    (got.re - expect).abs() < 1e-4 * expect.abs().max(1.0) && got.im.abs() < 1e-8,
                    "({r},{c}): {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn decoupled_cross_blocks_vanish() {
        let p = SystemParams::new(1.0, 0.7, 0.0, 0.3);
        let e = element_matrix((0.0, 0.75), 17.0, 1.0, &p).unwrap();
        let scale = frobenius(&e.k);
        for &i in &MECH {
            for &j in &ELEC {
                assert!(e.k[(i, j)].norm() < 1e-12 * scale);
                assert!(e.k[(j, i)].norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn equal_stiffness_without_coupling_needs_no_perturbation() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 0.0);
        let e = element_matrix((0.0, 1.0), 5.0, 1.0, &p).unwrap();
        // both fields see the same operator
        for r in 0..4 {
            for c in 0..4 {
                let m = e.k[(MECH[r], MECH[c])];
                let q = e.k[(ELEC[r], ELEC[c])];
                assert!((m - q).norm() < 1e-10 * m.norm().max(1.0));
            }
        }
    }

    #[test]
    fn short_element_at_high_frequency_stays_conditioned() {
        let p = SystemParams::baseline();
        for (a, b, alpha) in [(0.0, 0.75, 1.0), (0.75, 0.85, 0.5), (0.85, 1.0, 1.0)] {
            for w in [0.5, 5.0, 60.0, 150.0, 400.0] {
                let e = element_matrix((a, b), w, alpha, &p).unwrap();
                assert!(e.condition < 1e10, "{a} {b} {w}: {:e}", e.condition);
            }
        }
    }

    #[test]
    fn rejects_empty_interval() {
        let p = SystemParams::baseline();
        assert!(element_matrix((0.5, 0.5), 1.0, 1.0, &p).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn complex_symmetric_without_damping(
            a in 0.0f64..0.5,
            len in 0.05f64..0.5,
            omega in 0.5f64..150.0,
            alpha in 0.1f64..1.5,
            beta in 0.5f64..2.0,
            gamma in 0.0f64..0.3,
        ) {
            let p = SystemParams::new(1.0, beta, gamma, 0.0);
            let e = element_matrix((a, a + len), omega, alpha, &p).unwrap();
            prop_assert!(asymmetry(&e.k) < 1e-10, "asymmetry {}", asymmetry(&e.k));
        }
    }
}
