use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::drive::{drive_hamiltonian, DriveSpec};
use super::evolve::{evolve, max_step};
use crate::error::{Error, Result};
use crate::models::{ParamHamiltonian, ParamPoint};
use crate::numkit::{fit_oscillation, inner, ComplexMat, FitResult, C64};
use crate::qgt::{GroupFrame, QgtOptions};

/// Longest trace the protocol will simulate, µs.
pub const MAX_TRACE_DURATION: f64 = 60.0;
/// Expected Rabi periods per trace.
pub const TRACE_PERIODS: f64 = 6.0;
/// Population allowed to escape the prepared/partner pair.
pub const LEAKAGE_LIMIT: f64 = 1e-3;
/// Negative `Q` values down to this are clamped to zero.
pub const INVERSION_TOLERANCE: f64 = 1e-3;

/// Populations of the prepared state and its partner across the gap.
#[derive(Debug, Clone)]
pub struct RabiTrace {
    pub times: Vec<f64>,
    /// Population of the prepared state `|ψ_j⟩`.
    pub pop_ground: Vec<f64>,
    /// Population of the state of the other level in the same block.
    pub pop_excited: Vec<f64>,
    /// Index of the prepared state within its group (0-based); equals the block index.
    pub state: usize,
    /// Carrier actually used, rad/µs.
    pub omega: f64,
    /// Rotating-wave Rabi rate predicted from the drive matrix element, rad/µs.
    pub expected_rabi: f64,
}

impl RabiTrace {
    pub fn fit(&self) -> Result<FitResult> {
        fit_oscillation(&self.times, &self.pop_excited)
    }

    /// Half the fitted population-oscillation frequency; `|Δ|` when no oscillation is found.
    pub fn rabi_omega(&self, detuning: f64) -> Result<f64> {
        match self.fit() {
            Ok(f) => Ok(f.omega / 2.0),
            Err(Error::NoOscillation(_)) => Ok(detuning.abs()),
            Err(e) => Err(e),
        }
    }

    /// Adds seeded Gaussian readout noise; populations are then clipped to `[0, 1]`
    /// and rescaled where their sum exceeds one.
    pub fn with_noise(mut self, noise: &ReadoutNoise, stream: u64) -> Self {
        if noise.sigma == 0.0 {
            return self;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(stream);
        let dist = Normal::new(0.0, noise.sigma).expect("sigma validated");
        for (g, e) in self.pop_ground.iter_mut().zip(self.pop_excited.iter_mut()) {
            *g = (*g + dist.sample(&mut rng)).clamp(0.0, 1.0);
            *e = (*e + dist.sample(&mut rng)).clamp(0.0, 1.0);
            let total = *g + *e;
            if total > 1.0 {
                *g /= total;
                *e /= total;
            }
        }
        self
    }
}

/// Gaussian scatter on measured populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutNoise {
    pub sigma: f64,
    pub seed: u64,
}

impl ReadoutNoise {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidDrive(format!("noise sigma must be non-negative, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }
}

/// Level structure the protocol drives between.
#[derive(Debug, Clone)]
pub struct DrivePair {
    pub prepared: GroupFrame,
    pub partner: GroupFrame,
}

impl DrivePair {
    /// `opts` selects the prepared group; the partner is the only other group.
    pub fn at(h0: &ComplexMat, opts: &QgtOptions) -> Result<Self> {
        let prepared = GroupFrame::at(h0, opts)?;
        if prepared.decomp.groups.len() != 2 {
            return Err(Error::InvalidDrive(format!(
                "protocol needs exactly two degenerate levels, found {}",
                prepared.decomp.groups.len()
            )));
        }
        let mut other = opts.clone();
        other.band = crate::qgt::Band::Group(1 - prepared.group);
        let partner = GroupFrame::at(h0, &other)?;
        if partner.degeneracy() != prepared.degeneracy() {
            return Err(Error::InvalidDrive("levels differ in degeneracy".into()));
        }
        Ok(Self { prepared, partner })
    }

    /// `E_prepared − E_partner` in absolute value.
    pub fn gap(&self) -> f64 {
        (self.prepared.energy - self.partner.energy).abs()
    }

    /// `+1` when the partner lies above the prepared level.
    pub fn direction(&self) -> f64 {
        (self.partner.energy - self.prepared.energy).signum()
    }
}

/// Simulates one Rabi trace starting from the `j`-th prepared state.
///
/// The carrier is set to `ω = E_gap − 2Δ`. The evolution uses the full
/// time-dependent drive, written in the eigenbasis of `H₀`, and samples are
/// taken at whole multiples of the carrier period.
pub fn rabi_experiment(
    model: &dyn ParamHamiltonian,
    pt: &ParamPoint,
    spec: &DriveSpec,
    opts: &QgtOptions,
    j: usize,
) -> Result<RabiTrace> {
    let h0 = model.eval(pt)?;
    let pair = DrivePair::at(&h0, opts)?;
    if j >= pair.prepared.degeneracy() {
        return Err(Error::InvalidDrive(format!("state index {j} outside the prepared level")));
    }
    let mut spec = spec.clone();
    spec.omega = pair.gap() - 2.0 * spec.detuning;
    let driven = drive_hamiltonian(model, pt, &spec)?;

    let basis = &pair.prepared.decomp.vectors;
    let local = driven.in_basis(basis);
    let start = basis.adjoint().matvec(&pair.prepared.vectors.column(j));
    let partner = basis.adjoint().matvec(&pair.partner.vectors.column(j));

    let coupling = rotating_coupling(&local, &start, &partner, pair.direction());
    let expected = coupling.hypot(spec.detuning);
    let duration = stroboscopic(spec.duration.unwrap_or_else(|| default_duration(expected)), &spec);
    let dt = max_step(local.frequency_scale(), duration);
    let traj = evolve(|t| local.at(t), &start, duration, dt, spec.samples)?;

    let mut pop_ground = Vec::with_capacity(traj.states.len());
    let mut pop_excited = Vec::with_capacity(traj.states.len());
    for psi in &traj.states {
        let g = inner(&start, psi).norm_sqr();
        let e = inner(&partner, psi).norm_sqr();
        let leak = 1.0 - g - e;
        if leak > LEAKAGE_LIMIT {
            return Err(Error::BlockLeakage(leak));
        }
        pop_ground.push(g);
        pop_excited.push(e);
    }
    Ok(RabiTrace { times: traj.times, pop_ground, pop_excited, state: j, omega: spec.omega, expected_rabi: expected })
}

/// `|⟨e|h₊|g⟩|`: the co-rotating part of the drive between `start` and `partner`.
fn rotating_coupling(local: &super::DrivenHamiltonian, start: &[C64], partner: &[C64], direction: f64) -> f64 {
    let amp: C64 = local
        .terms
        .iter()
        .map(|(d, phase)| inner(partner, &d.matvec(start)) * C64::from_polar(1.0, -direction * phase))
        .sum();
    0.5 * local.depth * amp.norm()
}

/// Stretches `duration` so samples fall on whole carrier periods.
///
/// Stroboscopic readout follows the one-period Floquet map exactly, so the
/// counter-rotating micromotion at `2ω` cannot alias into the trace.
fn stroboscopic(duration: f64, spec: &DriveSpec) -> f64 {
    let period = std::f64::consts::TAU / spec.omega;
    let intervals = (spec.samples - 1) as f64;
    let periods_per_sample = (duration / (intervals * period)).round().max(1.0);
    periods_per_sample * period * intervals
}

fn default_duration(expected_rabi: f64) -> f64 {
    if expected_rabi > 0.0 {
        (TRACE_PERIODS * std::f64::consts::PI / expected_rabi).min(MAX_TRACE_DURATION)
    } else {
        MAX_TRACE_DURATION
    }
}

/// `Q = (Ω² − Δ²)/A²`.
pub fn invert_rabi(rabi_omega: f64, amplitude: f64, detuning: f64) -> Result<f64> {
    let q = (rabi_omega * rabi_omega - detuning * detuning) / (amplitude * amplitude);
    if q >= 0.0 {
        Ok(q)
    } else if q >= -INVERSION_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::InconsistentFit { omega: rabi_omega, delta: detuning })
    }
}

/// `(Re Q^{μν}, Im Q^{μν})` from the in-phase and quarter-phase two-tone rates.
pub fn extract_cross_terms(s0: f64, s_half_pi: f64, q_mumu: f64, q_nunu: f64) -> (f64, f64) {
    ((s0 - q_mumu - q_nunu) / 2.0, (s_half_pi - q_mumu - q_nunu) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DriveMode;
    use crate::models::{DiamondModel, DIAMOND_PAIRING};
    use crate::qgt::Band;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn protocol() -> QgtOptions {
        QgtOptions::block_basis(Band::Highest, &DIAMOND_PAIRING)
    }

    fn reference_trace(theta: f64, detuning_mhz: f64, j: usize) -> RabiTrace {
        let model = DiamondModel::new(TAU * 6.5);
        let spec = DriveSpec::new(DriveMode::one("phi"), TAU * 3.0, TAU * 13.0).with_detuning(TAU * detuning_mhz);
        rabi_experiment(&model, &DiamondModel::point(theta, 0.0), &spec, &protocol(), j).unwrap()
    }

    #[test]
    fn reference_settings_give_one_and_a_half_megahertz() {
        for j in 0..2 {
            let trace = reference_trace(FRAC_PI_2, 0.0, j);
            let rabi = trace.rabi_omega(0.0).unwrap() / TAU;
            assert!((rabi - 1.5).abs() / 1.5 < 0.01, "{rabi}");
            assert!((trace.expected_rabi / TAU - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn detuned_rate_follows_hyperbola() {
        // A large gap keeps A/ω small once the carrier is pulled by 2Δ.
        let model = DiamondModel::new(TAU * 50.0);
        let spec = DriveSpec::new(DriveMode::one("phi"), TAU * 3.0, 1.0).with_detuning(TAU * 4.0);
        let trace = rabi_experiment(&model, &DiamondModel::point(FRAC_PI_2, 0.0), &spec, &protocol(), 0).unwrap();
        let rabi = trace.rabi_omega(spec.detuning).unwrap() / TAU;
        assert!((rabi - 4.272).abs() / 4.272 < 0.03, "{rabi}");
    }

    #[test]
    fn mirror_angles_give_equal_rates() {
        let a = reference_trace(0.2 * PI, 0.0, 0).rabi_omega(0.0).unwrap();
        let b = reference_trace(0.8 * PI, 0.0, 0).rabi_omega(0.0).unwrap();
        assert!((a - b).abs() / a < 0.01);
    }

    #[test]
    fn populations_stay_in_block() {
        let trace = reference_trace(0.3 * PI, 0.0, 1);
        for (g, e) in trace.pop_ground.iter().zip(&trace.pop_excited) {
            assert!(g + e >= 1.0 - 1e-6 && g + e <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn inversion_examples() {
        assert!((invert_rabi(TAU * 1.5, TAU * 3.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        let q = invert_rabi(TAU * 4.272, TAU * 3.0, TAU * 4.0).unwrap();
        assert!((q - 0.25).abs() < 1e-3);
        assert_eq!(invert_rabi(2.0, 5.0, -2.0).unwrap(), 0.0);
        assert_eq!(invert_rabi(1.9999, 1.0, 2.0).unwrap(), 0.0);
        assert!(matches!(invert_rabi(1.0, 1.0, 2.0), Err(Error::InconsistentFit { .. })));
    }

    #[test]
    fn cross_term_examples() {
        assert_eq!(extract_cross_terms(0.5, 1.0, 0.25, 0.25), (0.0, 0.25));
        assert_eq!(extract_cross_terms(0.5, 0.0, 0.25, 0.25), (0.0, -0.25));
    }

    #[test]
    fn noise_is_seeded() {
        let trace = reference_trace(FRAC_PI_2, 0.0, 0);
        let noise = ReadoutNoise::new(0.02, 11).unwrap();
        let a = trace.clone().with_noise(&noise, 3);
        let b = trace.clone().with_noise(&noise, 3);
        let c = trace.clone().with_noise(&noise, 4);
        assert_eq!(a.pop_excited, b.pop_excited);
        assert_ne!(a.pop_excited, c.pop_excited);
        assert!(a.pop_excited.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(ReadoutNoise::new(-1.0, 0).is_err());
    }
}
