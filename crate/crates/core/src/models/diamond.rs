use crate::error::{Error, Result};
use crate::numkit::{ComplexMat, C64, I};

use super::{Pairing, ParamHamiltonian, ParamPoint};

/// Blocks of the diamond model: `{|0001⟩, |0010⟩}` and `{|0100⟩, |1000⟩}`.
pub const DIAMOND_PAIRING: Pairing = Pairing([[0, 1], [2, 3]]);

/// Effective four-level Hamiltonian in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiamondParams {
    /// Level splitting scale `Ω₀ = √(Ω² + Δ²)`, rad/µs.
    pub omega0: f64,
    pub theta: f64,
    pub phi: f64,
}

impl DiamondParams {
    /// From the sideband coupling `Ω` and detuning `Δ`: `θ = atan2(Ω, Δ)`.
    pub fn from_coupling(coupling: f64, detuning: f64, phi: f64) -> Self {
        Self { omega0: coupling.hypot(detuning), theta: coupling.atan2(detuning), phi }
    }

    pub fn coupling(&self) -> f64 {
        self.omega0 * self.theta.sin()
    }

    pub fn detuning(&self) -> f64 {
        self.omega0 * self.theta.cos()
    }
}

/// Builds the matrix in basis `(|0001⟩, |0010⟩, |0100⟩, |1000⟩)`.
pub fn diamond_hamiltonian(p: &DiamondParams) -> Result<ComplexMat> {
    if !(p.omega0 > 0.0) || !p.theta.is_finite() || !p.phi.is_finite() {
        return Err(Error::InvalidMatrix(format!("invalid diamond parameters {p:?}")));
    }
    Ok(diamond_matrix(p.omega0, p.theta.cos(), p.theta.sin(), p.phi, false))
}

/// `diag` fills `Ω₀·cosθ`-type entries, `off` the `Ω₀·sinθ`-type couplings.
/// With `phase_derivative` the couplings are replaced by their `φ`-derivative.
fn diamond_matrix(omega0: f64, diag: f64, off: f64, phi: f64, phase_derivative: bool) -> ComplexMat {
    let mut h = ComplexMat::zeros(4, 4);
    let d = omega0 * diag;
    h[(0, 0)] = C64::new(d, 0.0);
    h[(1, 1)] = C64::new(-d, 0.0);
    h[(2, 2)] = C64::new(d, 0.0);
    h[(3, 3)] = C64::new(-d, 0.0);
    let mut up = C64::from_polar(omega0 * off, phi); // ⟨0010|H|0001⟩
    let mut down = -C64::from_polar(omega0 * off, -phi); // ⟨1000|H|0100⟩
    if phase_derivative {
        up *= I;
        down *= -I;
    }
    h[(1, 0)] = up;
    h[(0, 1)] = up.conj();
    h[(3, 2)] = down;
    h[(2, 3)] = down.conj();
    h
}

/// The diamond Hamiltonian over `(theta, phi)` at fixed `Ω₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondModel {
    pub omega0: f64,
}

impl DiamondModel {
    pub fn new(omega0: f64) -> Self {
        assert!(omega0 > 0.0 && omega0.is_finite(), "Ω₀ must be positive");
        Self { omega0 }
    }

    pub fn point(theta: f64, phi: f64) -> ParamPoint {
        ParamPoint::from_pairs([("theta", theta), ("phi", phi)])
    }
}

impl ParamHamiltonian for DiamondModel {
    fn dim(&self) -> usize {
        4
    }

    fn param_names(&self) -> &[&'static str] {
        &["theta", "phi"]
    }

    fn eval(&self, pt: &ParamPoint) -> Result<ComplexMat> {
        diamond_hamiltonian(&DiamondParams { omega0: self.omega0, theta: pt.get("theta")?, phi: pt.get("phi")? })
    }

    fn analytic_partial(&self, pt: &ParamPoint, mu: &str) -> Option<Result<ComplexMat>> {
        let (theta, phi) = match (pt.get("theta"), pt.get("phi")) {
            (Ok(t), Ok(p)) => (t, p),
            (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
        };
        let (s, c) = theta.sin_cos();
        match mu {
            "theta" => Some(Ok(diamond_matrix(self.omega0, -s, c, phi, false))),
            "phi" => Some(Ok(diamond_matrix(self.omega0, 0.0, s, phi, true))),
            _ => None,
        }
    }
}
