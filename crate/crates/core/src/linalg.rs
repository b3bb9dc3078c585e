//! Thin helpers over nalgebra's partial-pivoting LU for the small dense
//! complex systems used throughout (at most 16×16 outside the FE oracle).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Pivot ratio below which a factorization is treated as singular.
const PIVOT_FLOOR: f64 = 1e-15;

/// Max absolute column sum.
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorization that refuses numerically singular matrices.
pub struct Lu {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Lu {
    pub fn new(a: CMatrix) -> Option<Self> {
        let lu = a.lu();
        let u = lu.u();
        let diag: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || !max.is_finite() || min <= PIVOT_FLOOR * max {
            return None;
        }
        Some(Self { lu })
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        self.lu
            .solve(b)
            .expect("factorization was checked nonsingular")
    }

    pub fn solve_vec(&self, b: &CVector) -> CVector {
        self.lu
            .solve(b)
            .expect("factorization was checked nonsingular")
    }

    pub fn inverse(&self) -> CMatrix {
        self.lu
            .try_inverse()
            .expect("factorization was checked nonsingular")
    }
}

/// One-norm condition number computed from the explicit inverse.
pub fn condition1(a: &CMatrix, lu: &Lu) -> f64 {
    norm1(a) * norm1(&lu.inverse())
}

/// Relative asymmetry `‖A − Aᵀ‖_F / ‖A‖_F`.
pub fn asymmetry(a: &CMatrix) -> f64 {
    let n = frobenius(a);
    if n == 0.0 {
        return 0.0;
    }
    frobenius(&(a - a.transpose())) / n
}


/// Solves `A·x = b` for a banded `A` with at most `bw` nonzero diagonals on
/// either side of the main one, by Gaussian elimination with partial pivoting
/// restricted to the band. `A` is consumed as scratch. Returns `None` on a
/// zero pivot.
pub fn solve_banded(mut a: CMatrix, mut b: CVector, bw: usize) -> Option<CVector> {
    let n = a.nrows();
    // row swaps widen the upper band to 2·bw
    let upper = 2 * bw;
    for k in 0..n {
        let last = (k + bw).min(n - 1);
        let (piv, best) = (k..=last)
            .map(|r| (r, a[(r, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(best > 0.0) {
            return None;
        }
        let cend = (k + upper).min(n - 1);
        if piv != k {
            for c in k..=cend {
                let t = a[(k, c)];
                a[(k, c)] = a[(piv, c)];
                a[(piv, c)] = t;
            }
            b.swap_rows(k, piv);
        }
        let pivot = a[(k, k)];
        for r in k + 1..=last {
            let factor = a[(r, k)] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            a[(r, k)] = Complex64::ZERO;
            for c in k + 1..=cend {
                let v = a[(k, c)];
                a[(r, c)] -= factor * v;
            }
            let v = b[k];
            b[r] -= factor * v;
        }
    }
    for k in (0..n).rev() {
        let cend = (k + upper).min(n - 1);
        let mut s = b[k];
        for c in k + 1..=cend {
            s -= a[(k, c)] * b[c];
        }
        b[k] = s / a[(k, k)];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_matrix_is_refused() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(4.0, 0.0),
            ],
        );
        assert!(Lu::new(a).is_none());
    }

    #[test]
    fn solve_and_condition() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.5),
        ]));
        let lu = Lu::new(a.clone()).unwrap();
        let x = lu.solve_vec(&CVector::from_vec(vec![Complex64::ONE, Complex64::ONE]));
        assert!((x[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((x[1] - Complex64::new(0.0, -2.0)).norm() < 1e-15);
        assert!((condition1(&a, &lu) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn banded_solve_matches_dense() {
        let n = 30;
        let bw = 3;
        let a = CMatrix::from_fn(n, n, |r, c| {
            if r.abs_diff(c) <= bw {
                // small diagonal forces pivoting
                let diag = if r == c { 0.01 } else { 0.0 };
                Complex64::new(((r * 7 + c * 3) % 11) as f64 - 5.0 + diag, ((r + 2 * c) % 5) as f64)
            } else {
                Complex64::ZERO
            }
        });
        let b = CVector::from_fn(n, |r, _| Complex64::new(r as f64, 1.0));
        let dense = Lu::new(a.clone()).unwrap().solve_vec(&b);
        let band = solve_banded(a, b, bw).unwrap();
        assert!((dense - band).norm() < 1e-9);
    }
}
