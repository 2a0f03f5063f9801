//! Numerical tolerances shared across the crate.

/// Allowed deviation of a pure state's norm (or a density operator's trace) from one.
pub const NORM: f64 = 1e-10;

/// Allowed deviation from Hermiticity, elementwise.
pub const HERMITIAN: f64 = 1e-8;

/// Most negative eigenvalue accepted for a density operator.
pub const POSITIVITY_SLACK: f64 = -1e-9;

/// Unitarity check for user-supplied operators, elementwise on `U U^dagger - I`.
pub const UNITARY: f64 = 1e-8;

/// Outcomes less likely than this carry no post-measurement state.
pub const NULL_PROBABILITY: f64 = 1e-14;

/// POVM coefficient completeness.
pub const POVM_COMPLETENESS: f64 = 1e-10;

/// Largest total Hilbert-space dimension the dense backend accepts.
pub const MAX_DENSE_DIM: usize = 1 << 22;
