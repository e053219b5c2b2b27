//! Shadowing experiments on linear hyperbolic torus maps and their perturbations.

mod flip;
mod linear;
mod matching;
mod perturbed;
mod winding;

pub use flip::{
    boundary_rotations, certify_fixed_points, flip_annulus_experiment, CircleLift, FixedPointCertificate,
    FixedPointRecord, FlipMap, FlipReport, FlowParams, RotationPair, RotationProfile, FLIP_ITERATIONS,
};
pub use linear::{
    apply_mod_one, d_components, least_period, linear_periodic_points, matrix_power, sample_pairs, shadowing_constant, to_f64,
    verify_expansion, ExpansionReport, IntMatrix, LinearModel, PeriodicSet, Separation, ShadowingParams, Vec2,
    EXPANSION_TOLERANCE,
};
pub use matching::{
    match_periodic_points, run_matching, semiconjugacy_check, two_sided_bound_check, MatchReport, MatchedPair,
    SemiconjugacyReport, TwoSidedReport,
};
pub use perturbed::{Mode, PerturbedMap};
pub use winding::{winding_index, LocalModel};
