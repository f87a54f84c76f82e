//! Named tolerances used throughout the crate.
//!
//! Every comparison against a threshold goes through a constant defined here,
//! so the numerical contract of the library can be audited in one place.
//! Tolerances are relative wherever a natural scale exists and absolute
//! (`ABS`) otherwise.

/// Generic absolute tolerance for quantities with no natural scale.
pub const ABS: f64 = 1e-12;

/// Relative floor for the smallest eigenvalue of an SPD point
/// (`min_eig > SPD_MIN_EIG_REL * max_eig`).
pub const SPD_MIN_EIG_REL: f64 = 1e-12;

/// Eigenvalues are clamped below at this value before taking logarithms.
pub const EIG_LOG_FLOOR: f64 = 1e-300;

/// Allowed deviation of `|det - 1|` for points of a unimodular SPD model.
pub const UNIMODULAR_DET: f64 = 1e-9;

/// Allowed deviation of `|det T| - 1` for congruence and toral matrices.
pub const UNIMODULAR_MAP_DET: f64 = 1e-9;

/// Relative tolerance for the geodesic interpolation identity
/// `d(a, [a,b](t)) = t d(a,b)`.
pub const GEODESIC_REL: f64 = 1e-9;

/// Slack for the CN (semi parallelogram) inequality residual.
pub const CN_SLACK: f64 = 1e-9;

/// Relative tolerance for `|log_map| = d` and the semi-decreasing property.
pub const LOG_MAP_REL: f64 = 1e-9;

/// Tolerance for the `exp_map . log_map` round trip.
pub const EXP_LOG_ROUNDTRIP: f64 = 1e-8;

/// Slack for comparison-angle monotonicity along shrinking scales.
pub const ANGLE_MONOTONE_SLACK: f64 = 1e-6;

/// Distances below this are treated as degenerate for angle computations.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

/// Relative PSD tolerance for Schoenberg Gram matrices:
/// `min_eig >= -PSD_REL * max_eig`.
pub const PSD_REL: f64 = 1e-8;

/// Tolerance for the Clifford generator relations.
pub const CLIFFORD_RELATION: f64 = 1e-12;

/// Tolerance for functional calculus against the eigendecomposition oracle.
pub const FUNCTIONAL_CALCULUS: f64 = 1e-9;

/// Slack added to the base-point change bound for the Bott map.
pub const BOTT_BOUND_SLACK: f64 = 1e-8;

/// Tolerance for the equivariance identity of induced automorphisms.
pub const EQUIVARIANCE: f64 = 1e-8;

/// Tolerance for isometry defects of descriptor actions.
pub const ISOMETRY_DEFECT: f64 = 1e-9;

/// Tolerance for orthogonality of derivative matrices.
pub const DERIVATIVE_ORTHOGONALITY: f64 = 1e-9;

/// Tolerance for the deformed-isometry length integral identity.
pub const DEFORMATION_LENGTH: f64 = 1e-10;

/// Error budget for grid-based oscillation and mean functionals.
pub const GRID_FUNCTIONAL: f64 = 1e-6;

/// Step of the dense evaluation grid used by grid-backed test functions.
pub const GRID_STEP: f64 = 1e-4;

/// Half-width of the dense evaluation grid (the sup over R is cut here).
pub const GRID_HALF_WIDTH: f64 = 50.0;

/// Slack for quadrature-based length-function inequalities.
pub const QUADRATURE_SLACK: f64 = 1e-6;

/// Upper bound on the Clifford generator count accepted by `build`.
pub const MAX_CLIFFORD_GENERATORS: usize = 12;

/// Upper bound on the word-ball radius in properness profiles.
pub const MAX_WORD_RADIUS: usize = 8;

/// Resolution at which probe orbits are quantized when deduplicating words.
pub const WORD_DEDUP_RESOLUTION: f64 = 1e-8;
