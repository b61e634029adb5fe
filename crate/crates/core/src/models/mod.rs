//! Parameterized Hamiltonians and the block (Morris-Shore) decomposition.
//!
//! Basis conventions:
//!
//! * Diamond model: `(|0001⟩, |0010⟩, |0100⟩, |1000⟩)`, the single-excitation
//!   states of four transmons with qubit 1 written leftmost.
//! * BHZ model: the written row order of its 4×4 matrix. Its two
//!   time-reversed blocks are index pairs `{0, 2}` and `{1, 3}`.

mod bhz;
mod blocks;
mod diamond;

use std::collections::BTreeMap;
use std::fmt;

pub use bhz::{bhz_fields, bhz_hamiltonian, BhzModel, BhzParams, BHZ_PAIRING};
pub use blocks::{ms_blocks, reassemble, BlockModel, Pairing};
pub use diamond::{diamond_hamiltonian, DiamondModel, DiamondParams, DIAMOND_PAIRING};

use crate::error::{Error, Result};
use crate::numkit::ComplexMat;

/// A point in parameter space: named, finite, real coordinates.
#[derive(Clone, PartialEq, Default)]
pub struct ParamPoint {
    coords: BTreeMap<String, f64>,
}

impl ParamPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut p = Self::new();
        for (k, v) in pairs {
            p.set(k, v);
        }
        p
    }

    /// Sets a coordinate. Panics on a non-finite value.
    pub fn set(&mut self, name: &str, value: f64) {
        assert!(value.is_finite(), "parameter `{name}` must be finite, got {value}");
        self.coords.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.coords.get(name).copied().ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    /// Copy with `name` shifted by `delta`.
    pub fn shifted(&self, name: &str, delta: f64) -> Result<Self> {
        let v = self.get(name)?;
        Ok(self.clone().with(name, v + delta))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.coords.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl fmt::Debug for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coords.iter()).finish()
    }
}

/// A Hermitian-matrix-valued function of named real parameters.
pub trait ParamHamiltonian: Sync {
    fn dim(&self) -> usize;

    fn param_names(&self) -> &[&'static str];

    fn eval(&self, pt: &ParamPoint) -> Result<ComplexMat>;

    /// Closed-form `∂H/∂mu`, when the model knows it.
    fn analytic_partial(&self, _pt: &ParamPoint, _mu: &str) -> Option<Result<ComplexMat>> {
        None
    }

    fn has_param(&self, name: &str) -> bool {
        self.param_names().contains(&name)
    }
}

/// Step of the fourth-order central difference used when no closed form exists.
pub const FD_STEP: f64 = 1e-4;
const RICHARDSON_TOL: f64 = 1e-7;

/// `∂H/∂mu` at `pt`.
///
/// Uses the model's analytic partial if registered, otherwise a fourth-order
/// central difference with step `1e-4`, cross-checked against step `5e-5`.
pub fn partial(model: &dyn ParamHamiltonian, pt: &ParamPoint, mu: &str) -> Result<ComplexMat> {
    if !model.has_param(mu) {
        return Err(Error::UnknownParam(mu.to_string()));
    }
    if let Some(p) = model.analytic_partial(pt, mu) {
        return p;
    }
    let coarse = central_difference(model, pt, mu, FD_STEP)?;
    let fine = central_difference(model, pt, mu, FD_STEP / 2.0)?;
    let scale = coarse.max_abs().max(1.0);
    let gap = (&coarse - &fine).max_abs();
    if gap > RICHARDSON_TOL * scale {
        return Err(Error::NumericalFailure(format!(
            "finite-difference partial along `{mu}` not converged: step-halving changes it by {gap:e}"
        )));
    }
    Ok(fine)
}

/// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`.
pub fn central_difference(model: &dyn ParamHamiltonian, pt: &ParamPoint, mu: &str, h: f64) -> Result<ComplexMat> {
    let at = |k: f64| model.eval(&pt.shifted(mu, k * h)?);
    let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
    let num = &(&(&p1 - &m1).scale_real(8.0) - &p2) + &m2;
    Ok(num.scale_real(1.0 / (12.0 * h)))
}
