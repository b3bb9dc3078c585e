//! Exact frequency-domain solution of the coupled beam / transmission line
//! with one spectral element per constant-stiffness interval.

mod assembly;
mod condense;
mod dispersion;
mod element;
mod measure;

pub use assembly::{
    assemble, dof_map, measured_dofs, nodes, solve_frf, Dof, DynamicStiffness, FactoredSystem,
    Field, Response, FREE_DOFS, MAX_SYSTEM_CONDITION,
};
pub use condense::{condense, condense_boundary, condense_matrix, CondensedPair};
pub use dispersion::{
    characteristic_coefficients, dispersion_roots, relative_residual, DispersionRoots,
    DEGENERACY_TOL,
};
pub use element::{element_matrix, ElementMatrix, MAX_ELEMENT_CONDITION};
pub use measure::{synthesize_measurements, Synthesis};
