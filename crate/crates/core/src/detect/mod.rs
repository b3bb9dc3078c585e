//! Damage identification: the unbalanced-force functional, the simplex
//! optimizer, multi-start identification, max–min tuning of the line and
//! surface scans.

pub mod experiment;
pub mod functional;
pub mod identify;
pub mod minmax;
pub mod scan;
pub mod simplex;

pub use experiment::{Experiment, RecordedExperiment, SyntheticExperiment};
pub use functional::{evaluate_functional, evaluate_weighted, functional_gradient, FunctionalEval, Weighting};
pub use identify::{identify, IdentifyOptions, Sampling};
pub use minmax::{tune_minmax, MinMaxOptions};
pub use scan::{scan_surface, ScanAxes, SurfaceScan};
pub use simplex::{axis_simplex, nelder_mead, Bounds, SimplexOptions, SimplexResult, BOX_OFFSET};
