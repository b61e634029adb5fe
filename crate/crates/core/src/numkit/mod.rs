//! Dense complex linear algebra, Hermitian eigensolver, propagators,
//! the order-one Bessel function and single-tone frequency estimation.
//!
//! Everything here is a pure function of its inputs.

pub mod bessel;
pub mod eigen;
pub mod fit;
pub mod matrix;

pub use bessel::{bessel_j1, bessel_j1_inverse, bessel_jn};
pub use eigen::{default_deg_tol, eigh, fix_phase, propagator, SpectralDecomp};
pub use fit::{fit_oscillation, FitResult};
pub use matrix::{det, inner, norm, ComplexMat, C64, I, ONE, ZERO};

use std::f64::consts::TAU;

/// Ordinary frequency in MHz to angular frequency in rad/µs.
#[inline]
pub fn mhz_to_angular(nu_mhz: f64) -> f64 {
    TAU * nu_mhz
}

/// Angular frequency in rad/µs to ordinary frequency in MHz.
#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TAU
}
