//! Fisher information and saturation analysis for multiphase
//! interferometers with Fock-state probes.
//!
//! Layers, bottom up: dense complex linear algebra and the matrix
//! permanent ([`linalg`]), fixed-photon-number Fock spaces ([`fock`]),
//! interferometer models and their parameter derivatives
//! ([`interferometer`]), Fisher matrices ([`fisher`]), saturation
//! conditions ([`saturation`]), optimal-measurement constructions
//! ([`optimal`]) and phase-space scans ([`scan`]).

// `!(x <= tol)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod interferometer;
pub mod linalg;
pub mod optimal;
pub mod saturation;
pub mod scan;
mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
