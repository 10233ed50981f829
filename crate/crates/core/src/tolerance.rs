//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by a default code path lives here so callers can
//! override them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Symmetry/Hermiticity check for eigenvalue input.
    pub hermitian: f64,
    /// Unitarity check on mode matrices before lifting.
    pub unitary: f64,
    /// Normalization check on states and projectors.
    pub normalized: f64,
    /// Completeness check on projector sets (entrywise).
    pub completeness: f64,
    /// Drop threshold and imaginary-Gram threshold for Gram-Schmidt.
    pub gram_schmidt: f64,
    /// Overlap modulus below which a projector counts as orthogonal to the probe.
    pub eps_orth: f64,
    /// Saturation residual threshold.
    pub tol_sat: f64,
    /// Spectral-norm gap below which F = F_Q is declared.
    pub gap_sat: f64,
    /// Overlap modulus below which a first-order overlap counts as zero.
    pub first_order_zero: f64,
    /// Max |Im Omega| tolerated before optimal constructions refuse.
    pub weak_commutativity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            unitary: 1e-10,
            normalized: 1e-10,
            completeness: 1e-9,
            gram_schmidt: 1e-10,
            eps_orth: 1e-10,
            tol_sat: 1e-8,
            gap_sat: 1e-6,
            first_order_zero: 1e-12,
            weak_commutativity: 1e-8,
        }
    }
}
