use thiserror::Error;

use crate::graph::{AnnulusId, CircleId, PieceId, ValidationReport};

/// Failures of the combinatorial layer (graphs, rewrites, relations).
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph failed validation:\n{0}")]
    Invalid(ValidationReport),

    #[error("permutation of {what} is not a bijection on its ids")]
    InconsistentPermutation { what: &'static str },

    #[error("annulus {0} has an indeterminate twist class (rotation unspecified)")]
    IndeterminateTwist(AnnulusId),

    #[error("circle {0} has no rotation number; the boundary collapse cannot be chosen")]
    MissingRotation(CircleId),

    #[error("circle {0} belongs to a pseudo-Anosov piece but has no prong count")]
    MissingProngs(CircleId),

    #[error("incompatible rotation {rotation} for a {prongs}-prong boundary: denominator must divide {}", 2 * prongs)]
    IncompatibleRotation { prongs: u32, rotation: String },

    #[error("untwisted annulus {annulus} joins finite-order pieces {a} and {b} of different periods ({pa} vs {pb})")]
    PeriodMismatch {
        annulus: AnnulusId,
        a: PieceId,
        b: PieceId,
        pa: u64,
        pb: u64,
    },

    #[error("sector counts h={hyperbolic}, p={parabolic} have odd difference")]
    SectorParity { hyperbolic: u32, parabolic: u32 },

    #[error("branched lift needs local order k >= 2, got {0}")]
    BranchOrder(u32),

    #[error("relation edge {a} -- {b} joins nodes of periods {pa} and {pb}")]
    RelationPeriods { a: u32, b: u32, pa: u64, pb: u64 },

    #[error("relation refers to unknown node {0}")]
    UnknownNode(u32),

    #[error("Euler characteristic {chi} of finite-order quotient is not integral for period {period}")]
    QuotientEuler { chi: i64, period: u32 },
}

/// Failures of the numerical lab.
#[derive(Debug, Error)]
pub enum NumericError {
    #[error("matrix {0:?} is not hyperbolic with determinant 1")]
    NotHyperbolic([[i64; 2]; 2]),

    #[error("{what} out of range: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("circle map samples are not a monotone degree-one lift (at x = {x})")]
    InvalidLift { x: f64 },

    #[error("A^n - I is singular or overflows for n = {0}")]
    Singular(u32),

    #[error("perturbation with Lipschitz size {eps} may not be invertible (must stay below {limit})")]
    PerturbationTooLarge { eps: f64, limit: f64 },

    #[error("vector field vanishes on the sampling circle; retry with a smaller radius")]
    VanishingField,

    #[error("sampling too coarse to resolve the winding number; increase samples")]
    Undersampled,

    #[error("matched set is not closed under the map (gap {gap:.3e} at period {period})")]
    OrbitNotClosed { period: u32, gap: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
