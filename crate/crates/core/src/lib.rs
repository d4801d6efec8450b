//! Whitney extension, finiteness checks and Lusin approximation for
//! horizontal curves in the first Heisenberg group.
//!
//! The crate is organized bottom-up:
//!
//! - [`modulus`] and [`polynomial`] hold the scalar building blocks,
//! - [`heisenberg`] the group law, frame and horizontality tests,
//! - [`jets`] Whitney-field containers and validation,
//! - [`area_velocity`] the area discrepancy and ω-velocity functionals,
//! - [`extension`] the explicit horizontal extension,
//! - [`finiteness`] the (m+2)-point checker,
//! - [`lusin`] Lusin approximation of densely sampled curves,
//! - [`cli`] the command-line surface used by the bundled binary.

pub mod area_velocity;
pub mod cli;
pub mod error;
pub mod extension;
pub mod finiteness;
pub mod heisenberg;
pub mod io;
pub mod jets;
pub mod lusin;
pub mod modulus;
pub mod polynomial;
pub mod quadrature;
pub mod series;
pub mod suite;

pub use area_velocity::{
    area_discrepancy, av_ratio_scan, discrete_area, discrete_av_scan, discrete_velocity,
    left_invariance_audit, omega_velocity, AVScanReport, AuditMode, CurveValues, ScanMode,
};
pub use error::{Condition, ConditionFailure, Error, Result};
pub use extension::{
    extend_cinfty, extend_horizontal, horizontality_repair, vertical_redefine,
    whitney_extend_scalar, BumpSpec, ExtensionConstants, ExtensionOptions, Gap,
    PerturbationPair, PiecewiseSmoothCurve, RepairCase, ScalarPiece,
};
pub use finiteness::{equivalence_audit, finiteness_check, EquivalenceReport, FinitenessReport};
pub use heisenberg::{
    frame_at, group_inv, group_mul, horizontality_residual, leibniz_vertical_jet, HPoint,
    SampledCurve,
};
pub use jets::{
    cm_decay_diagnostic, remainder, validate_cmw, HorizontalJetTriple, SampleSet, ScalarJet,
    WhitneyFieldReport,
};
pub use lusin::{
    admissible_cells, integrate_l1w, l1w_estimate, lusin_approximate, lusin_cinfty,
    uniform_parameter_set, vertical_l1w, CellEstimate, L1wEstimate, LusinOptions, LusinResult,
    UniformParameterReport,
};
pub use modulus::{holder_seminorm, ModulusKind, ModulusOfContinuity};
pub use polynomial::{
    divided_differences, integral_abs, markov_derivative_bound, newton_interpolant,
    taylor_from_jet, NodeSet, Polynomial,
};
