//! Weak-drive QGT spectroscopy.
//!
//! A parameter `λ_μ` of `H₀` is modulated as `λ_μ + (2A/ω) cos(ωt + φ_μ)`,
//! which to first order adds `h₁ = (2A/ω) cos(ωt + φ_μ) ∂_μH₀`. Starting in a
//! state `|ψ_j⟩` of one degenerate level, the population of the partner state
//! across the gap oscillates as `sin²(Ωt)` with
//!
//! ```text
//! Ω = √(A² Q^{μμ}_{jj} + Δ²),    Δ = (E_gap − ω)/2
//! ```
//!
//! in the rotating-wave limit. Driving two parameters with phase offset `δφ`
//! replaces `Q^{μμ}` by `Q^{μμ} + Q^{νν} + 2 Re(Q^{μν} e^{∓iδφ})`, which gives
//! access to the off-diagonal metric and the curvature.
//!
//! `Ω` here is half the angular frequency of the population oscillation.
//! Simulations keep the full time-dependent drive; the rotating-wave form
//! only sets expectations and trace durations.

mod drive;
mod evolve;
mod protocol;
mod rabi;

pub use drive::{
    drive_hamiltonian, DriveMode, DriveSpec, DrivenHamiltonian, DEFAULT_TRACE_SAMPLES, MAX_DRIVE_RATIO,
    MIN_TRACE_SAMPLES,
};
pub use evolve::{evolve, max_step, Trajectory, NORM_DRIFT_LIMIT};
pub use protocol::{driven_qgt, DrivenQgt, ProtocolSpec, RUNS};
pub use rabi::{
    extract_cross_terms, invert_rabi, rabi_experiment, DrivePair, RabiTrace, ReadoutNoise, INVERSION_TOLERANCE,
    LEAKAGE_LIMIT, MAX_TRACE_DURATION, TRACE_PERIODS,
};
