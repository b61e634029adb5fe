use crate::error::{Error, Result};
use crate::numkit::mhz_to_angular;

/// Nearest-neighbour pairs of the ring, 0-based: `12, 23, 34, 41`.
pub const PAIRS: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

/// Four transmons on a ring. All frequencies are angular, rad/µs.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    /// Idle frequencies `ω_k`.
    pub omega_q: [f64; 4],
    /// Anharmonicities `α_k`, typically negative.
    pub alpha: [f64; 4],
    /// `J_kl` in the order of [`PAIRS`].
    pub coupling: [f64; 4],
    /// Fock truncation per transmon, 2 or 3.
    pub levels: usize,
}

impl CircuitSpec {
    /// Representative device: `ω/2π = 4800…5100 MHz` in 100 MHz steps,
    /// `α/2π = −220 MHz`, `J/2π = 5 MHz`, two levels.
    pub fn default_device() -> Self {
        Self {
            omega_q: [4800.0, 4900.0, 5000.0, 5100.0].map(mhz_to_angular),
            alpha: [mhz_to_angular(-220.0); 4],
            coupling: [mhz_to_angular(5.0); 4],
            levels: 2,
        }
    }

    /// `J` for the unordered pair `{k, l}`; zero for non-neighbours.
    pub fn coupling_between(&self, k: usize, l: usize) -> f64 {
        PAIRS.iter().position(|&(a, b)| (a, b) == (k, l) || (a, b) == (l, k)).map_or(0.0, |p| self.coupling[p])
    }

    /// Copy with every coupling except `{k, l}` set to zero.
    pub fn isolate_pair(&self, k: usize, l: usize) -> Self {
        let mut cs = self.clone();
        for (p, &(a, b)) in PAIRS.iter().enumerate() {
            if !((a, b) == (k, l) || (a, b) == (l, k)) {
                cs.coupling[p] = 0.0;
            }
        }
        cs
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.levels == 2 || self.levels == 3) {
            return Err(Error::ConfigInvalid(format!("levels must be 2 or 3, got {}", self.levels)));
        }
        if self.omega_q.iter().chain(&self.alpha).chain(&self.coupling).any(|v| !v.is_finite()) {
            return Err(Error::ConfigInvalid("circuit parameters must be finite".into()));
        }
        Ok(())
    }

    /// Pairs whose coupling is not small against their mean-frequency detuning.
    pub fn validity_warnings(&self, ms: &ModulationSpec) -> Vec<String> {
        let mut out = Vec::new();
        for (p, &(k, l)) in PAIRS.iter().enumerate() {
            let j = self.coupling[p].abs();
            let detuning = (ms.mean(self, k) - ms.mean(self, l)).abs();
            if j > 0.0 && j > 0.1 * detuning {
                out.push(format!(
                    "pair {}{}: |J| = {:.3} rad/µs is not below 0.1 × detuning {:.3} rad/µs",
                    k + 1,
                    l + 1,
                    j,
                    detuning
                ));
            }
        }
        out
    }
}

/// One modulation tone `ω^T cos(2πf t + β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    /// `ω^T`, rad/µs.
    pub amplitude: f64,
    /// `2πf`, rad/µs.
    pub freq: f64,
    /// `β`, radians.
    pub phase: f64,
}

impl Tone {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.freq * t + self.phase).cos()
    }

    /// Phase accumulated relative to the mean: `∫ ω^T cos(2πf t + β) dt` with zero period average.
    pub fn phase_excursion(&self, t: f64) -> f64 {
        if self.freq == 0.0 {
            return 0.0;
        }
        self.amplitude / self.freq * (self.freq * t + self.phase).sin()
    }

    /// `ω^T / 2πf`.
    pub fn amp_over_freq(&self) -> f64 {
        self.amplitude / self.freq
    }
}

/// Frequency control of one tunable transmon.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDrive {
    /// 0-based qubit index.
    pub qubit: usize,
    /// `ω̄_m`, rad/µs.
    pub mean: f64,
    pub tones: Vec<Tone>,
}

/// Longitudinal modulation `ω_m(t) = ω̄_m + Σ_i ω^T_{mi} cos(2πf_{mi} t + β_{mi})`.
///
/// Qubits without an entry sit at their idle frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModulationSpec {
    pub qubits: Vec<QubitDrive>,
}

impl ModulationSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn drive(&self, k: usize) -> Option<&QubitDrive> {
        self.qubits.iter().find(|q| q.qubit == k)
    }

    pub fn mean(&self, cs: &CircuitSpec, k: usize) -> f64 {
        self.drive(k).map_or(cs.omega_q[k], |q| q.mean)
    }

    pub fn means(&self, cs: &CircuitSpec) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.mean(cs, k))
    }

    /// `ω_k(t) − ω̄_k`.
    pub fn offset(&self, k: usize, t: f64) -> f64 {
        self.drive(k).map_or(0.0, |q| q.tones.iter().map(|tone| tone.value(t)).sum())
    }

    /// `∫ (ω_k − ω̄_k) dt`, with zero average over the tone periods.
    pub fn phase_excursion(&self, k: usize, t: f64) -> f64 {
        self.drive(k).map_or(0.0, |q| q.tones.iter().map(|tone| tone.phase_excursion(t)).sum())
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 4];
        for q in &self.qubits {
            if q.qubit >= 4 || seen[q.qubit] {
                return Err(Error::ConfigInvalid(format!("qubit index {} repeated or out of range", q.qubit)));
            }
            seen[q.qubit] = true;
            if q.tones.len() > 2 {
                return Err(Error::ConfigInvalid(format!("qubit {} has more than two tones", q.qubit + 1)));
            }
            let finite = q.mean.is_finite()
                && q.tones.iter().all(|t| t.amplitude.is_finite() && t.freq.is_finite() && t.phase.is_finite());
            if !finite {
                return Err(Error::ConfigInvalid(format!("qubit {} modulation is not finite", q.qubit + 1)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_lookup() {
        let cs = CircuitSpec { coupling: [1.0, 2.0, 3.0, 4.0], ..CircuitSpec::default_device() };
        assert_eq!(cs.coupling_between(1, 0), 1.0);
        assert_eq!(cs.coupling_between(0, 3), 4.0);
        assert_eq!(cs.coupling_between(0, 2), 0.0);
        assert_eq!(cs.isolate_pair(2, 3).coupling, [0.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn modulation_validation() {
        let tone = Tone { amplitude: 1.0, freq: 2.0, phase: 0.0 };
        let ok = ModulationSpec { qubits: vec![QubitDrive { qubit: 0, mean: 5.0, tones: vec![tone, tone] }] };
        assert!(ok.validate().is_ok());
        let three = ModulationSpec { qubits: vec![QubitDrive { qubit: 0, mean: 5.0, tones: vec![tone; 3] }] };
        assert!(three.validate().is_err());
        let dup = ModulationSpec {
            qubits: vec![
                QubitDrive { qubit: 1, mean: 5.0, tones: vec![] },
                QubitDrive { qubit: 1, mean: 5.0, tones: vec![] },
            ],
        };
        assert!(dup.validate().is_err());
        assert!(CircuitSpec { levels: 4, ..CircuitSpec::default_device() }.validate().is_err());
    }

    #[test]
    fn tone_phase_is_antiderivative() {
        let tone = Tone { amplitude: 3.0, freq: 7.0, phase: 0.4 };
        let (t, h) = (0.3, 1e-6);
        let d = (tone.phase_excursion(t + h) - tone.phase_excursion(t - h)) / (2.0 * h);
        assert!((d - tone.value(t)).abs() < 1e-6);
    }

    #[test]
    fn default_device_warnings() {
        let cs = CircuitSpec::default_device();
        assert!(cs.validity_warnings(&ModulationSpec::none()).is_empty());
        let strong = CircuitSpec { coupling: [mhz_to_angular(50.0); 4], ..cs };
        assert_eq!(strong.validity_warnings(&ModulationSpec::none()).len(), 4);
    }
}
