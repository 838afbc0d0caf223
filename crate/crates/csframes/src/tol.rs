//! Numeric tolerances used across the crate.
//!
//! Quantities with a closed rational or radical form (inner products of
//! roots of unity, rational column norms) are compared at 1e-12 relative.
//! Aggregated Gram and unbiasedness checks accumulate more rounding over
//! a few hundred terms and get 1e-10.

/// Relative tolerance for quantities with an exact closed form.
pub const EXACT_REL: f64 = 1e-12;

/// Max-entry tolerance for Gram-matrix comparisons (tightness, ETF).
pub const GRAM: f64 = 1e-10;

/// Unimodularity and unbiasedness checks on Hadamard and MUB matrices.
pub const UNITARY: f64 = 1e-10;

/// Default relative l2 error below which a recovery trial counts as exact.
pub const RECOVERY_SUCCESS: f64 = 1e-4;

/// Guard band applied to strict inequalities at rational boundaries, so
/// thresholds landing exactly on an integer resolve deterministically.
pub const BOUNDARY_GUARD: f64 = 1e-12;
