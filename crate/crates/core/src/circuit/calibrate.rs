use super::fock::{FockSpace, RotatingFrame};
use super::spec::{CircuitSpec, ModulationSpec, QubitDrive, Tone};
use crate::dynamics::{evolve, max_step};
use crate::error::{Error, Result};
use crate::numkit::{bessel_j1, fit_oscillation, FitResult, C64, ONE};

/// Samples per calibration trace.
pub const CALIBRATION_SAMPLES: usize = 256;
/// Exchange periods per calibration trace when no duration is given.
pub const CALIBRATION_PERIODS: f64 = 3.0;
/// Peak-to-peak transfer below which no exchange oscillation is reported.
pub const MIN_EXCHANGE_CONTRAST: f64 = 0.5;

/// `|J · J₁(ω^T / 2πf)|`.
pub fn effective_coupling(j: f64, amp_over_freq: f64) -> Result<f64> {
    if !(amp_over_freq >= 0.0) {
        return Err(Error::DomainError { x: amp_over_freq, domain: "[0, 50]" });
    }
    Ok((j * bessel_j1(amp_over_freq)?).abs())
}

/// Outcome of one parametric-exchange calibration.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    /// Sideband coupling `|g|`, rad/µs.
    pub coupling: f64,
    /// Half the fitted population-oscillation frequency, rad/µs.
    pub rabi: f64,
    /// Peak-to-peak population transfer.
    pub contrast: f64,
    pub fit: FitResult,
}

/// Measures the sideband exchange rate of pair `(k, l)` by full evolution.
///
/// Starts with qubit `k` excited, evolves in the rotating frame with all
/// other couplings removed, and fits the population of qubit `l`. The
/// partner population follows `C sin²(Ω_R t)` with `Ω_R² = g² + (δ/2)²`,
/// where `δ` is the residual dispersive shift of the sideband, so the
/// coupling is reported as `|g| = Ω_R √C`.
///
/// Samples are taken at whole periods of the first tone found on the pair.
pub fn calibrate_effective(
    cs: &CircuitSpec,
    ms: &ModulationSpec,
    pair: (usize, usize),
    duration: Option<f64>,
) -> Result<Calibration> {
    cs.validate()?;
    ms.validate()?;
    let (k, l) = pair;
    if k >= 4 || l >= 4 || k == l {
        return Err(Error::ConfigInvalid(format!("invalid pair ({k}, {l})")));
    }
    let tone = [k, l]
        .iter()
        .filter_map(|&q| ms.drive(q))
        .flat_map(|q| q.tones.first().copied())
        .next()
        .ok_or_else(|| Error::InvalidDrive(format!("no tone on pair {}{}", k + 1, l + 1)))?;
    let isolated = cs.isolate_pair(k, l);
    let j = isolated.coupling_between(k, l);
    if j == 0.0 {
        return Err(Error::NoOscillation(format!("pair {}{} is uncoupled", k + 1, l + 1)));
    }
    let expected = effective_coupling(j, tone.amp_over_freq())?;
    let period = std::f64::consts::TAU / tone.freq.abs();
    let requested = duration.unwrap_or_else(|| {
        CALIBRATION_PERIODS * std::f64::consts::PI / if expected > 0.0 { expected } else { j.abs() }
    });
    let intervals = (CALIBRATION_SAMPLES - 1) as f64;
    let duration = (requested / (intervals * period)).round().max(1.0) * period * intervals;

    let frame = RotatingFrame::new(&isolated, ms);
    let space = FockSpace::new(cs.levels);
    let mut start = [0; 4];
    start[k] = 1;
    let mut target = [0; 4];
    target[l] = 1;
    let mut psi0 = vec![C64::new(0.0, 0.0); space.dim()];
    psi0[space.index(start)] = ONE;
    let dt = max_step(frame.frequency_scale(), duration);
    let traj = evolve(|t| frame.at(t), &psi0, duration, dt, CALIBRATION_SAMPLES)?;
    let target = space.index(target);
    let pops: Vec<f64> = traj.states.iter().map(|psi| psi[target].norm_sqr()).collect();

    let fit = fit_oscillation(&traj.times, &pops)?;
    let contrast = 2.0 * fit.amplitude.abs();
    if contrast < MIN_EXCHANGE_CONTRAST {
        return Err(Error::NoOscillation(format!("exchange contrast {contrast:.3} below {MIN_EXCHANGE_CONTRAST}")));
    }
    let rabi = fit.omega / 2.0;
    Ok(Calibration { coupling: rabi * contrast.min(1.0).sqrt(), rabi, contrast, fit })
}

/// Standard calibration point: the default device with only `J₁₂` kept
/// (qubits 1 and 2 at 4800 and 4900 MHz, `J/2π = 5 MHz`), qubit 1 modulated
/// at the 100 MHz pair detuning with `ω^T/2πf = amp_over_freq`.
pub fn bessel_operating_point(amp_over_freq: f64, phase: f64) -> (CircuitSpec, ModulationSpec) {
    let cs = CircuitSpec::default_device().isolate_pair(0, 1);
    let freq = cs.omega_q[1] - cs.omega_q[0];
    let ms = ModulationSpec {
        qubits: vec![QubitDrive {
            qubit: 0,
            mean: cs.omega_q[0],
            tones: vec![Tone { amplitude: amp_over_freq * freq, freq, phase }],
        }],
    };
    (cs, ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn effective_coupling_examples() {
        assert_eq!(effective_coupling(3.0, 0.0).unwrap(), 0.0);
        let g = effective_coupling(TAU * 10.0, 1.0).unwrap();
        assert!((g / TAU - 4.400_505_857).abs() < 1e-8);
        let peak = effective_coupling(-2.0, 1.841_183_781_340_659).unwrap();
        assert!((peak - 2.0 * 0.581_865_224_3).abs() < 1e-9);
        assert!(effective_coupling(1.0, -0.1).is_err());
    }

    #[test]
    fn half_order_bessel_point() {
        let (cs, ms) = bessel_operating_point(0.5, 0.0);
        let cal = calibrate_effective(&cs, &ms, (0, 1), None).unwrap();
        let expected = effective_coupling(cs.coupling[0], 0.5).unwrap();
        assert!((expected / TAU - 1.2113).abs() < 1e-3);
        let ratio = cal.coupling / expected;
        assert!((0.95..=1.05).contains(&ratio), "{ratio}");
    }

    #[test]
    fn tone_phase_does_not_change_rate() {
        let (cs, ms_a) = bessel_operating_point(1.0, 0.0);
        let (_, ms_b) = bessel_operating_point(1.0, 1.3);
        let a = calibrate_effective(&cs, &ms_a, (0, 1), None).unwrap();
        let b = calibrate_effective(&cs, &ms_b, (0, 1), None).unwrap();
        assert!((a.coupling - b.coupling).abs() / a.coupling < 0.01);
    }

    #[test]
    fn no_modulation_no_exchange() {
        let (cs, ms) = bessel_operating_point(0.0, 0.0);
        let err = calibrate_effective(&cs, &ms, (0, 1), None).unwrap_err();
        assert!(matches!(err, Error::NoOscillation(_)), "{err:?}");
    }

    #[test]
    fn uncoupled_pair_has_no_exchange() {
        let (cs, ms) = bessel_operating_point(1.0, 0.0);
        let cs = CircuitSpec { coupling: [0.0; 4], ..cs };
        assert!(matches!(calibrate_effective(&cs, &ms, (0, 1), None), Err(Error::NoOscillation(_))));
    }
}
