use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Lu};

use super::assembly::{measured_dofs, DynamicStiffness};

/// Reduced operator on measured unknowns, `D̃ = D_mm − D_mn·D_nn⁻¹·D_nm`, and
/// influence matrix `H = D_mn·D_nn⁻¹`.
#[derive(Debug, Clone)]
pub struct CondensedPair {
    pub d_tilde: CMatrix,
    pub h: CMatrix,
}

fn split(n: usize, measured: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    for &i in measured {
        if i >= n || seen[i] {
            return Err(Error::InvalidInput(format!(
                "measured index {i} out of range or repeated (dimension {n})"
            )));
        }
        seen[i] = true;
    }
    Ok((0..n).filter(|i| !seen[*i]).collect())
}

fn pick(d: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |r, c| d[(rows[r], cols[c])])
}

/// Condenses any square matrix onto the `measured` indices. `omega` only
/// labels the error.
pub fn condense_matrix(d: &CMatrix, measured: &[usize], omega: f64) -> Result<CondensedPair> {
    let n = d.nrows();
    let rest = split(n, measured)?;
    let d_mm = pick(d, measured, measured);
    if rest.is_empty() {
        return Ok(CondensedPair {
            d_tilde: d_mm,
            h: CMatrix::zeros(measured.len(), 0),
        });
    }
    let d_mn = pick(d, measured, &rest);
    let d_nm = pick(d, &rest, measured);
    let d_nn = pick(d, &rest, &rest);
    let lu = Lu::new(d_nn.transpose()).ok_or(Error::SingularCondensation { omega })?;
    // Hᵀ = D_nn⁻ᵀ·D_mnᵀ
    let h = lu.solve(&d_mn.transpose()).transpose();
    let d_tilde = d_mm - &h * d_nm;
    Ok(CondensedPair { d_tilde, h })
}

pub fn condense(ds: &DynamicStiffness, measured: &[usize]) -> Result<CondensedPair> {
    condense_matrix(&ds.d, measured, ds.omega)
}

/// Condensation onto the two boundary slopes `(φ′(0), φ′(1))`.
pub fn condense_boundary(ds: &DynamicStiffness) -> Result<CondensedPair> {
    condense(ds, &measured_dofs())
}
