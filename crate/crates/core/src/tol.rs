//! Numeric tolerances shared across the crate.
//!
//! Every threshold that decides a verdict lives here so reports can echo the
//! exact values that were used.

/// Pivot and feasibility tolerance of the simplex kernel.
pub const LP: f64 = 1e-9;

/// Sign tolerance for membership and separation predicates.
pub const CONE: f64 = 1e-9;

/// Generators closer than this after unit normalisation are duplicates.
pub const DEDUP: f64 = 1e-12;

/// Rank and zero tests on constraint gradients.
pub const RANK: f64 = 1e-8;

/// Constraint satisfaction at a candidate point (`|phi(y)|`, active set detection).
pub const FEASIBILITY: f64 = 1e-8;

/// Interior test perturbation: `v ± eps e_i` must stay inside the cone.
pub const INTERIOR_EPS: f64 = 1e-6;

/// Multiplier re-verification against the original cones.
pub const MULTIPLIER: f64 = 1e-9;

/// Ridge added to normal equations in multiplier recovery.
pub const RIDGE: f64 = 1e-12;

/// Residual below which Lagrange / Kuhn-Tucker multipliers are certified.
pub const STATIONARITY: f64 = 1e-6;

/// Maximum-condition residual that still certifies a candidate.
pub const CERTIFY: f64 = 1e-6;

/// Maximum-condition residual beyond which a candidate is refuted.
pub const REFUTE: f64 = 1e-4;

/// Nontriviality floor for `(p(t), p_c)` along the adjoint arc.
pub const NONTRIVIAL: f64 = 1e-9;

/// Fixed-point attainment residual in the covering checks.
pub const ATTAIN: f64 = 1e-8;

/// Iteration cap of the covering fixed-point scheme.
pub const FIXED_POINT_ITERS: usize = 500;

/// Default final-ratio threshold of the directional differentiability check.
pub const DIFF_THRESHOLD: f64 = 1e-3;

/// Required decay factor of the error ratio per halving.
pub const DECAY_FACTOR: f64 = 1.5;

/// Ratios at or below this absolute floor count as exact linearization.
pub const DIFF_FLOOR: f64 = 1e-10;
