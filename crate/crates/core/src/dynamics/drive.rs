use crate::error::{Error, Result};
use crate::models::{partial, ParamHamiltonian, ParamPoint};
use crate::numkit::ComplexMat;

/// Weak-drive guard on `A/ω`.
pub const MAX_DRIVE_RATIO: f64 = 0.3;
pub const MIN_TRACE_SAMPLES: usize = 64;
pub const DEFAULT_TRACE_SAMPLES: usize = 512;

/// Which parameters are modulated, and with which tone phases.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveMode {
    /// `λ_μ → λ_μ + (2A/ω) cos(ωt + φ_μ)`.
    OneParam { mu: String, phi_mu: f64 },
    /// Both parameters modulated at the same carrier.
    TwoParam { mu: String, nu: String, phi_mu: f64, phi_nu: f64 },
}

impl DriveMode {
    pub fn one(mu: &str) -> Self {
        DriveMode::OneParam { mu: mu.to_string(), phi_mu: 0.0 }
    }

    /// Two-parameter drive with `φ_μ = 0` and `φ_ν = delta_phi`.
    pub fn two(mu: &str, nu: &str, delta_phi: f64) -> Self {
        DriveMode::TwoParam { mu: mu.to_string(), nu: nu.to_string(), phi_mu: 0.0, phi_nu: delta_phi }
    }

    /// `δφ = φ_ν − φ_μ`; zero for a single tone.
    pub fn delta_phi(&self) -> f64 {
        match self {
            DriveMode::OneParam { .. } => 0.0,
            DriveMode::TwoParam { phi_mu, phi_nu, .. } => phi_nu - phi_mu,
        }
    }

    /// `(parameter, tone phase)` for each modulated parameter.
    pub fn tones(&self) -> Vec<(&str, f64)> {
        match self {
            DriveMode::OneParam { mu, phi_mu } => vec![(mu.as_str(), *phi_mu)],
            DriveMode::TwoParam { mu, nu, phi_mu, phi_nu } => {
                vec![(mu.as_str(), *phi_mu), (nu.as_str(), *phi_nu)]
            }
        }
    }
}

/// A weak periodic parameter drive. Frequencies are angular, rad/µs.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub mode: DriveMode,
    /// `A`.
    pub amplitude: f64,
    /// Carrier `ω`. [`rabi_experiment`](super::rabi_experiment) replaces it
    /// with `E_gap − 2Δ` before running.
    pub omega: f64,
    /// `Δ`, half the mismatch between the level gap and the carrier.
    pub detuning: f64,
    /// Trace length in µs; `None` picks six expected Rabi periods.
    pub duration: Option<f64>,
    pub samples: usize,
}

impl DriveSpec {
    pub fn new(mode: DriveMode, amplitude: f64, omega: f64) -> Self {
        Self { mode, amplitude, omega, detuning: 0.0, duration: None, samples: DEFAULT_TRACE_SAMPLES }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDrive(msg));
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return bad(format!("amplitude must be positive, got {}", self.amplitude));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return bad(format!("carrier must be positive, got {}", self.omega));
        }
        if self.amplitude / self.omega > MAX_DRIVE_RATIO {
            return bad(format!("A/ω = {} exceeds {MAX_DRIVE_RATIO}", self.amplitude / self.omega));
        }
        if !self.detuning.is_finite() {
            return bad("detuning must be finite".into());
        }
        if self.samples < MIN_TRACE_SAMPLES {
            return bad(format!("{} samples, need at least {MIN_TRACE_SAMPLES}", self.samples));
        }
        if let Some(d) = self.duration {
            if !(d > 0.0) || !d.is_finite() {
                return bad(format!("duration must be positive, got {d}"));
            }
        }
        Ok(())
    }

    /// `2A/ω`, the modulation depth of each driven parameter.
    pub fn depth(&self) -> f64 {
        2.0 * self.amplitude / self.omega
    }
}

/// `H(t) = H₀ + (2A/ω) Σ_k cos(ωt + φ_k) ∂_k H₀`.
#[derive(Debug, Clone)]
pub struct DrivenHamiltonian {
    pub h0: ComplexMat,
    /// `(∂_k H₀, φ_k)` per driven parameter.
    pub terms: Vec<(ComplexMat, f64)>,
    pub depth: f64,
    pub omega: f64,
}

impl DrivenHamiltonian {
    pub fn at(&self, t: f64) -> ComplexMat {
        let mut h = self.h0.clone();
        for (d, phase) in &self.terms {
            h = &h + &d.scale_real(self.depth * (self.omega * t + phase).cos());
        }
        h
    }

    /// The same operator expressed in the orthonormal basis given by the columns of `v`.
    pub fn in_basis(&self, v: &ComplexMat) -> Self {
        let conj = |m: &ComplexMat| &(&v.adjoint() * m) * v;
        Self {
            h0: conj(&self.h0),
            terms: self.terms.iter().map(|(d, p)| (conj(d), *p)).collect(),
            depth: self.depth,
            omega: self.omega,
        }
    }

    /// Upper bound on the angular frequencies present, rad/µs.
    pub fn frequency_scale(&self) -> f64 {
        let spread = self.h0.frobenius() * std::f64::consts::SQRT_2;
        let drive: f64 = self.terms.iter().map(|(d, _)| self.depth * d.frobenius()).sum();
        spread.max(self.omega) + drive
    }
}

pub fn drive_hamiltonian(model: &dyn ParamHamiltonian, pt: &ParamPoint, spec: &DriveSpec) -> Result<DrivenHamiltonian> {
    spec.validate()?;
    let h0 = model.eval(pt)?;
    let terms = spec
        .mode
        .tones()
        .into_iter()
        .map(|(mu, phase)| Ok((partial(model, pt, mu)?, phase)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DrivenHamiltonian { h0, terms, depth: spec.depth(), omega: spec.omega })
}
