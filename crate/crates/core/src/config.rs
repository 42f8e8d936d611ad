//! Numerical tolerances shared by every checker.

use serde::{Deserialize, Serialize};

/// "Exact zero" for identities on exactly representable constants.
pub const EXACT_ZERO: f64 = 1e-10;
/// Zero test for quantities obtained through floating-point pipelines.
pub const DERIVED_ZERO: f64 = 1e-8;
/// Threshold on the max residual for "is pluriclosed" style gates.
pub const GATE: f64 = 1e-8;
/// Relative singular-value cutoff deciding subspace rank.
pub const RANK_RELATIVE: f64 = 1e-9;
/// Absolute singular-value floor below which everything counts as zero.
pub const RANK_ABSOLUTE: f64 = 1e-12;
/// Metrics need `min eigenvalue > PD_RELATIVE * trace`.
pub const PD_RELATIVE: f64 = 1e-10;
/// `|J^2 + I|` bound for accepting a matrix as a complex structure.
pub const COMPLEX_STRUCTURE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub exact: f64,
    pub derived: f64,
    pub gate: f64,
    pub rank_relative: f64,
    pub rank_absolute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: EXACT_ZERO,
            derived: DERIVED_ZERO,
            gate: GATE,
            rank_relative: RANK_RELATIVE,
            rank_absolute: RANK_ABSOLUTE,
        }
    }
}

impl Tolerances {
    /// Overrides the zero-test tolerance, keeping the others.
    pub fn with_zero(mut self, zero: f64) -> Self {
        self.exact = zero;
        self
    }
}
