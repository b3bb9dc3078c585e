//! Simulation of a beam coupled to a fourth-order electric transmission line
//! through distributed piezoelectric patches, and identification of a
//! localized bending-stiffness loss from purely electric frequency responses.
//!
//! * [`model`]: parameters, damage profile, loads, grids, measurement sets.
//! * [`spectral`]: exact spectral-element dynamic stiffness, condensation, synthetic data.
//! * [`oracle`]: independent cubic-Hermite finite elements for cross-checks and eigenfrequencies.
//! * [`detect`]: damage functional, Nelder–Mead, multi-start identification, max–min tuning, scans.
//! * [`cli`]: batch front end behind the `pem-detect` binary.

// `!(a > b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detect;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
