//! Cubic-Hermite finite elements for the coupled beam / transmission line.
//!
//! Independent of the spectral solver: polynomial shape functions, physical
//! (unscaled) unknowns and the polynomial dynamic stiffness
//! `D(ω) = K − ω²M + iωC`. Used to cross-validate spectral FRFs and to
//! compute natural frequencies.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{solve_banded, CMatrix, CVector};
use crate::model::{moments_to_forces, validate_params, DamageProfile, LoadCase, SystemParams};
use crate::spectral::{Dof, Field};

pub const MIN_ELEMENTS: usize = 12;
const ALIGN_TOL: f64 = 1e-12;
/// Half-bandwidth of the node-major global matrices.
const BANDWIDTH: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct FeMesh {
    pub nodes: Vec<f64>,
    /// Bending stiffness of each element.
    pub alphas: Vec<f64>,
}

impl FeMesh {
    /// Roughly uniform mesh of `n_elems` elements with `x ± eps` on nodes.
    pub fn aligned(n_elems: usize, p: &SystemParams, dp: &DamageProfile) -> Result<Self> {
        validate_params(p, dp)?;
        if n_elems < MIN_ELEMENTS {
            return Err(Error::InvalidInput(format!(
                "at least {MIN_ELEMENTS} elements required, got {n_elems}"
            )));
        }
        let bounds = [0.0, dp.left(), dp.right(), 1.0];
        let lens = [bounds[1], bounds[2] - bounds[1], 1.0 - bounds[2]];
        let mut counts = lens.map(|l| ((l * n_elems as f64).round() as usize).max(1));
        // put any rounding surplus or deficit on the longest outer interval
        let total: usize = counts.iter().sum();
        let longest = if lens[0] >= lens[2] { 0 } else { 2 };
        counts[longest] = (counts[longest] + n_elems).saturating_sub(total).max(1);

        let mut nodes = vec![0.0];
        for seg in 0..3 {
            for i in 1..=counts[seg] {
                let t = i as f64 / counts[seg] as f64;
                nodes.push(if i == counts[seg] {
                    bounds[seg + 1]
                } else {
                    bounds[seg] + t * lens[seg]
                });
            }
        }
        Self::from_nodes(nodes, p, dp)
    }

    /// Mesh on explicit nodes; the damaged-zone boundaries must be nodes.
    pub fn from_nodes(nodes: Vec<f64>, p: &SystemParams, dp: &DamageProfile) -> Result<Self> {
        validate_params(p, dp)?;
        if nodes.len() < MIN_ELEMENTS + 1 {
            return Err(Error::InvalidInput(format!(
                "at least {MIN_ELEMENTS} elements required"
            )));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 || nodes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidInput(
                "mesh nodes must increase strictly from 0 to 1".into(),
            ));
        }
        for edge in [dp.left(), dp.right()] {
            if !nodes.iter().any(|s| (s - edge).abs() <= ALIGN_TOL) {
                return Err(Error::MisalignedMesh(format!("no node at s = {edge}")));
            }
        }
        let alphas = nodes
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                if mid > dp.left() && mid < dp.right() {
                    p.alpha0 * dp.d
                } else {
                    p.alpha0
                }
            })
            .collect();
        Ok(Self { nodes, alphas })
    }

    pub fn n_elems(&self) -> usize {
        self.alphas.len()
    }
}

/// Real matrices of `D(ω) = K − ω²M + iωC` over the free unknowns.
#[derive(Debug, Clone)]
pub struct FeSystem {
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub dof_map: Vec<Dof>,
}

fn bending(h: f64) -> [[f64; 4]; 4] {
    let (h2, h3) = (h * h, h * h * h);
    [
        [12.0 / h3, 6.0 / h2, -12.0 / h3, 6.0 / h2],
        [6.0 / h2, 4.0 / h, -6.0 / h2, 2.0 / h],
        [-12.0 / h3, -6.0 / h2, 12.0 / h3, -6.0 / h2],
        [6.0 / h2, 2.0 / h, -6.0 / h2, 4.0 / h],
    ]
}

fn consistent_mass(h: f64) -> [[f64; 4]; 4] {
    let s = h / 420.0;
    let h2 = h * h;
    [
        [156.0 * s, 22.0 * h * s, 54.0 * s, -13.0 * h * s],
        [22.0 * h * s, 4.0 * h2 * s, 13.0 * h * s, -3.0 * h2 * s],
        [54.0 * s, 13.0 * h * s, 156.0 * s, -22.0 * h * s],
        [-13.0 * h * s, -3.0 * h2 * s, -22.0 * h * s, 4.0 * h2 * s],
    ]
}

// ∫ N′ᵢ N′ⱼ
fn slope_gram(h: f64) -> [[f64; 4]; 4] {
    let s = 1.0 / (30.0 * h);
    let h2 = h * h;
    [
        [36.0 * s, 3.0 * h * s, -36.0 * s, 3.0 * h * s],
        [3.0 * h * s, 4.0 * h2 * s, -3.0 * h * s, -h2 * s],
        [-36.0 * s, -3.0 * h * s, 36.0 * s, -3.0 * h * s],
        [3.0 * h * s, -h2 * s, -3.0 * h * s, 4.0 * h2 * s],
    ]
}

pub fn fe_assemble(p: &SystemParams, dp: &DamageProfile, mesh: &FeMesh) -> Result<FeSystem> {
    // re-check alignment so hand-built meshes cannot slip through
    let checked = FeMesh::from_nodes(mesh.nodes.clone(), p, dp)?;
    if checked.alphas != mesh.alphas {
        return Err(Error::MisalignedMesh(
            "element stiffnesses disagree with the damage profile".into(),
        ));
    }
    let n_nodes = mesh.nodes.len();
    let n_full = 4 * n_nodes;
    let mut k = DMatrix::<f64>::zeros(n_full, n_full);
    let mut m = DMatrix::<f64>::zeros(n_full, n_full);
    let mut c = DMatrix::<f64>::zeros(n_full, n_full);

    // local Hermite index (w, w′ at each end) to node-major global index
    let place = |e: usize, i: usize, field: usize| 4 * (e + i / 2) + field + i % 2;
    for e in 0..mesh.n_elems() {
        let h = mesh.nodes[e + 1] - mesh.nodes[e];
        let kb = bending(h);
        let mc = consistent_mass(h);
        let gs = slope_gram(h);
        for i in 0..4 {
            for j in 0..4 {
                let (ui, uj) = (place(e, i, 0), place(e, j, 0));
                let (fi, fj) = (place(e, i, 2), place(e, j, 2));
                k[(ui, uj)] += mesh.alphas[e] * kb[i][j];
                k[(fi, fj)] += p.beta * kb[i][j];
                m[(ui, uj)] += mc[i][j];
                m[(fi, fj)] += mc[i][j];
                c[(ui, fj)] += p.gamma * gs[i][j];
                c[(fi, uj)] -= p.gamma * gs[i][j];
                c[(fi, fj)] += p.delta * mc[i][j];
            }
        }
    }

    let mut dof_map = Vec::new();
    let mut keep = Vec::new();
    for node in 0..n_nodes {
        for (f, field) in [(0, Field::Mechanical), (2, Field::Electric)] {
            for order in 0..2u8 {
                let end = node == 0 || node == n_nodes - 1;
                if end && order == 0 {
                    continue;
                }
                dof_map.push(Dof { node, field, order });
                keep.push(4 * node + f + order as usize);
            }
        }
    }
    let pick = |a: &DMatrix<f64>| DMatrix::from_fn(keep.len(), keep.len(), |r, s| a[(keep[r], keep[s])]);
    Ok(FeSystem {
        k: pick(&k),
        m: pick(&m),
        c: pick(&c),
        dof_map,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spectrum {
    /// Beam block alone, as if the patches were removed.
    Mechanical,
    /// Transmission-line block alone.
    Electric,
    /// Both fields with the gyroscopic piezoelectric coupling (δ ignored).
    Coupled,
}

fn field_indices(sys: &FeSystem, field: Field) -> Vec<usize> {
    sys.dof_map
        .iter()
        .enumerate()
        .filter(|(_, d)| d.field == field)
        .map(|(i, _)| i)
        .collect()
}

fn sub(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| a[(rows[r], cols[c])])
}

/// Eigenpairs of `K·v = λ·M·v`, ascending, with `M`-orthonormal vectors.
fn generalized_symmetric(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigenSolver("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenSolver("singular Cholesky factor".into()))?;
    let a = &linv * k * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = linv.transpose() * DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vecs))
}

fn sqrt_all(v: &[f64], n: usize) -> Result<Vec<f64>> {
    v.iter()
        .take(n)
        .map(|&l| {
            if l > 0.0 {
                Ok(l.sqrt())
            } else {
                Err(Error::EigenSolver(format!("non-positive eigenvalue {l}")))
            }
        })
        .collect()
}

/// Lowest `n_modes` undamped natural frequencies, ascending.
///
/// The coupled spectrum is computed on a Ritz basis of the lowest uncoupled
/// modes of each field, which is exact for the pairs well inside the basis.
pub fn eigenfrequencies(sys: &FeSystem, n_modes: usize, spectrum: Spectrum) -> Result<Vec<f64>> {
    let mech = field_indices(sys, Field::Mechanical);
    let elec = field_indices(sys, Field::Electric);
    let block = |idx: &[usize]| generalized_symmetric(&sub(&sys.k, idx, idx), &sub(&sys.m, idx, idx));
    let out = match spectrum {
        Spectrum::Mechanical => sqrt_all(&block(&mech)?.0, n_modes)?,
        Spectrum::Electric => sqrt_all(&block(&elec)?.0, n_modes)?,
        Spectrum::Coupled => coupled_frequencies(sys, &mech, &elec, n_modes)?,
    };
    if out.len() < n_modes {
        return Err(Error::EigenSolver(format!(
            "only {} modes available, {n_modes} requested",
            out.len()
        )));
    }
    Ok(out)
}

fn coupled_frequencies(
    sys: &FeSystem,
    mech: &[usize],
    elec: &[usize],
    n_modes: usize,
) -> Result<Vec<f64>> {
    let basis = (4 * n_modes + 16).min(mech.len()).min(elec.len());
    let (lm, vm) = generalized_symmetric(&sub(&sys.k, mech, mech), &sub(&sys.m, mech, mech))?;
    let (le, ve) = generalized_symmetric(&sub(&sys.k, elec, elec), &sub(&sys.m, elec, elec))?;
    let vm = vm.columns(0, basis).into_owned();
    let ve = ve.columns(0, basis).into_owned();
    // projected gyroscopic term; uncoupled blocks are diag(λ) with unit mass
    let g = vm.transpose() * sub(&sys.c, mech, elec) * &ve;
    let r = 2 * basis;
    let mut kr = DMatrix::<f64>::zeros(r, r);
    let mut gr = DMatrix::<f64>::zeros(r, r);
    for i in 0..basis {
        kr[(i, i)] = lm[i];
        kr[(basis + i, basis + i)] = le[i];
    }
    gr.view_mut((0, basis), (basis, basis)).copy_from(&g);
    gr.view_mut((basis, 0), (basis, basis)).copy_from(&(-g.transpose()));
    // (K − ω² + iωG)v = 0 with v = e^{iωt}: companion in λ = iω,
    // λ² v + λ G v + K v = 0
    let mut a = DMatrix::<f64>::zeros(2 * r, 2 * r);
    a.view_mut((0, r), (r, r)).fill_with_identity();
    a.view_mut((r, 0), (r, r)).copy_from(&(-kr));
    a.view_mut((r, r), (r, r)).copy_from(&(-gr));
    let lambdas = a.complex_eigenvalues();
    let mut freqs: Vec<f64> = lambdas
        .iter()
        .filter(|l| l.im > 0.0 && l.re.abs() <= 1e-6 * l.im)
        .map(|l| l.im)
        .collect();
    freqs.sort_by(f64::total_cmp);
    freqs.truncate(n_modes);
    Ok(freqs)
}

impl FeSystem {
    /// `K − ω²M + iωC`.
    pub fn dynamic_stiffness(&self, omega: f64) -> CMatrix {
        CMatrix::from_fn(self.k.nrows(), self.k.ncols(), |r, c| {
            Complex64::new(
                self.k[(r, c)] - omega * omega * self.m[(r, c)],
                omega * self.c[(r, c)],
            )
        })
    }

    fn slope_dofs(&self) -> [usize; 2] {
        let last = self.dof_map.iter().map(|d| d.node).max().unwrap_or(0);
        let find = |node| {
            self.dof_map
                .iter()
                .position(|d| d.node == node && d.field == Field::Electric && d.order == 1)
                .expect("boundary slopes are free")
        };
        [find(0), find(last)]
    }
}

/// Boundary slopes `(φ′(0), φ′(1))` under the end moments of `load`.
pub fn fe_frf(sys: &FeSystem, omega: f64, load: &LoadCase) -> Result<[Complex64; 2]> {
    load.validate()?;
    let d = sys.dynamic_stiffness(omega);
    let [i0, i1] = sys.slope_dofs();
    let mut rhs = CVector::zeros(d.nrows());
    let f = moments_to_forces(load.moments());
    rhs[i0] = f[0];
    rhs[i1] = f[1];
    let x = solve_banded(d, rhs, BANDWIDTH).ok_or(Error::SingularSystem {
        omega,
        condition: f64::INFINITY,
    })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem {
            omega,
            condition: f64::INFINITY,
        });
    }
    Ok([x[i0], x[i1]])
}
