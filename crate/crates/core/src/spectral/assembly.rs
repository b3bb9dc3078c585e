use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{condition1, CMatrix, CVector, Lu};
use crate::model::{moments_to_forces, validate_params, DamageProfile, LoadCase, SystemParams};

use super::element::element_matrix;

pub const NODES: usize = 4;
pub const DOFS_PER_NODE: usize = 4;
/// Free degrees of freedom after `u = φ = 0` at both ends.
pub const FREE_DOFS: usize = NODES * DOFS_PER_NODE - 4;

/// Condition estimate above which a full solve is refused.
pub const MAX_SYSTEM_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Mechanical,
    Electric,
}

/// One nodal unknown: node index, field and derivative order (0 or 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dof {
    pub node: usize,
    pub field: Field,
    pub order: u8,
}

impl Dof {
    fn local(&self) -> usize {
        let f = match self.field {
            Field::Mechanical => 0,
            Field::Electric => 2,
        };
        f + self.order as usize
    }

    fn is_constrained(&self) -> bool {
        self.order == 0 && (self.node == 0 || self.node == NODES - 1)
    }
}

/// Free nodal unknowns in assembly order.
pub fn dof_map() -> Vec<Dof> {
    let mut out = Vec::with_capacity(FREE_DOFS);
    for node in 0..NODES {
        for field in [Field::Mechanical, Field::Electric] {
            for order in 0..2 {
                let dof = Dof { node, field, order };
                if !dof.is_constrained() {
                    out.push(dof);
                }
            }
        }
    }
    out
}

/// Indices of `φ′(0)` and `φ′(1)` in [`dof_map`].
pub fn measured_dofs() -> [usize; 2] {
    let map = dof_map();
    let find = |node| {
        map.iter()
            .position(|d| {
                d.node == node && d.field == Field::Electric && d.order == 1
            })
            .expect("boundary slope is always free")
    };
    [find(0), find(NODES - 1)]
}

/// Global dynamic stiffness of the three-interval beam at one frequency.
///
/// Mechanical unknowns and forces carry the factor `i` (see
/// [`super::element`]); the matrix is complex symmetric.
#[derive(Debug, Clone)]
pub struct DynamicStiffness {
    pub d: CMatrix,
    pub dof_map: Vec<Dof>,
    pub omega: f64,
}

/// Node abscissae `[0, x − eps, x + eps, 1]`.
pub fn nodes(dp: &DamageProfile) -> [f64; NODES] {
    [0.0, dp.left(), dp.right(), 1.0]
}

pub fn assemble(omega: f64, p: &SystemParams, dp: &DamageProfile) -> Result<DynamicStiffness> {
    validate_params(p, dp)?;
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidInput(format!("omega must be positive, got {omega}")));
    }
    let xs = nodes(dp);
    let alphas = [p.alpha0, p.alpha0 * dp.d, p.alpha0];

    let mut full = CMatrix::zeros(NODES * DOFS_PER_NODE, NODES * DOFS_PER_NODE);
    for e in 0..3 {
        let em = element_matrix((xs[e], xs[e + 1]), omega, alphas[e], p)?;
        let base = e * DOFS_PER_NODE;
        let mut block = full.view_mut((base, base), (8, 8));
        block += &em.k;
    }

    let map = dof_map();
    let global: Vec<usize> = map
        .iter()
        .map(|d| d.node * DOFS_PER_NODE + d.local())
        .collect();
    let d = CMatrix::from_fn(map.len(), map.len(), |r, c| full[(global[r], global[c])]);
    Ok(DynamicStiffness {
        d,
        dof_map: map,
        omega,
    })
}

impl DynamicStiffness {
    pub fn condition(&self) -> f64 {
        match Lu::new(self.d.clone()) {
            Some(lu) => condition1(&self.d, &lu),
            None => f64::INFINITY,
        }
    }

    /// Right-hand side for a pair of end moments, in assembly variables.
    pub fn load_vector(&self, load: &LoadCase) -> CVector {
        let mut rhs = CVector::zeros(self.dof_map.len());
        let [i0, i1] = measured_dofs();
        let f = moments_to_forces(load.moments());
        rhs[i0] = f[0];
        rhs[i1] = f[1];
        rhs
    }
}

/// Full nodal response to one load case, in physical variables.
#[derive(Debug, Clone)]
pub struct Response {
    pub omega: f64,
    pub dof_map: Vec<Dof>,
    pub values: Vec<Complex64>,
}

impl Response {
    /// `(φ′(0), φ′(1))`.
    pub fn boundary_slopes(&self) -> [Complex64; 2] {
        let [i0, i1] = measured_dofs();
        [self.values[i0], self.values[i1]]
    }

    pub fn get(&self, dof: Dof) -> Option<Complex64> {
        self.dof_map
            .iter()
            .position(|d| *d == dof)
            .map(|i| self.values[i])
    }
}

/// Factorized system at one frequency, reusable across load cases.
pub struct FactoredSystem {
    ds: DynamicStiffness,
    lu: Lu,
    pub condition: f64,
}

impl FactoredSystem {
    pub fn new(ds: DynamicStiffness) -> Result<Self> {
        let omega = ds.omega;
        let lu = Lu::new(ds.d.clone()).ok_or(Error::SingularSystem {
            omega,
            condition: f64::INFINITY,
        })?;
        let condition = condition1(&ds.d, &lu);
        if !(condition < MAX_SYSTEM_CONDITION) {
            return Err(Error::SingularSystem { omega, condition });
        }
        Ok(Self { ds, lu, condition })
    }

    pub fn solve(&self, load: &LoadCase) -> Response {
        let x = self.lu.solve_vec(&self.ds.load_vector(load));
        let values = self
            .ds
            .dof_map
            .iter()
            .zip(x.iter())
            .map(|(dof, v)| match dof.field {
                // ũ = i·u
                Field::Mechanical => Complex64::new(v.im, -v.re),
                Field::Electric => *v,
            })
            .collect();
        Response {
            omega: self.ds.omega,
            dof_map: self.ds.dof_map.clone(),
            values,
        }
    }
}

pub fn solve_frf(
    omega: f64,
    p: &SystemParams,
    dp: &DamageProfile,
    load: &LoadCase,
) -> Result<Response> {
    load.validate()?;
    let sys = FactoredSystem::new(assemble(omega, p, dp)?)?;
    Ok(sys.solve(load))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{asymmetry, frobenius};

    #[test]
    fn dof_bookkeeping() {
        let map = dof_map();
        assert_eq!(map.len(), 12);
        assert_eq!(measured_dofs(), [1, 11]);
        assert!(map.iter().all(|d| !d.is_constrained()));
    }

    #[test]
    fn baseline_matrix_is_symmetric() {
        let ds = assemble(5.0, &SystemParams::baseline(), &DamageProfile::baseline()).unwrap();
        assert_eq!(ds.d.shape(), (12, 12));
        assert!(asymmetry(&ds.d) < 1e-10);
    }

    #[test]
    fn undamaged_response_does_not_depend_on_position() {
        let p = SystemParams::baseline();
        let load = LoadCase::real(0.3, 1.0);
        for w in [3.0, 25.0, 70.0] {
            let a = solve_frf(w, &p, &DamageProfile::undamaged(0.3, 0.05), &load).unwrap();
            let b = solve_frf(w, &p, &DamageProfile::undamaged(0.71, 0.05), &load).unwrap();
            let (ma, mb) = (a.boundary_slopes(), b.boundary_slopes());
            for i in 0..2 {
                assert!((ma[i] - mb[i]).norm() < 1e-12 * ma[i].norm().max(1e-300));
            }
        }
    }

    #[test]
    fn mirrored_damage_is_a_signed_permutation() {
        let p = SystemParams::baseline().with_delta(0.05);
        let dp = DamageProfile::new(0.6, 0.3, 0.07);
        let w = 33.0;
        let a = assemble(w, &p, &dp).unwrap();
        let b = assemble(w, &p, &dp.mirrored()).unwrap();
        // P maps dof (n, f, o) to (3 − n, f, o) with sign (−1)^o
        let map = dof_map();
        let n = map.len();
        let mut perm = CMatrix::zeros(n, n);
        for (i, d) in map.iter().enumerate() {
            let target = Dof {
                node: NODES - 1 - d.node,
                ..*d
            };
            let j = map.iter().position(|e| *e == target).unwrap();
            perm[(j, i)] = Complex64::new(if d.order == 1 { -1.0 } else { 1.0 }, 0.0);
        }
        let mapped = &perm * &a.d * perm.transpose();
        assert!(frobenius(&(mapped - &b.d)) < 1e-11 * frobenius(&b.d));
    }

    #[test]
    fn damping_keeps_resonance_finite() {
        let p = SystemParams::baseline().with_delta(0.1);
        let dp = DamageProfile::undamaged(0.5, 0.05);
        let res = p.undamaged_resonances(20.0);
        let load = LoadCase::real(0.0, 1.0);
        for r in res {
            for off in [-1e-3, 0.0, 1e-3] {
                let o = solve_frf(r + off, &p, &dp, &load).unwrap();
                assert!(o.values.iter().all(|v| v.is_finite()));
            }
        }
    }
}
