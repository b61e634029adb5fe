//! Chern numbers and the metric–curvature relation.
//!
//! Two independent routes to a Chern number are provided. The curvature
//! integral applies trapezoidal quadrature to a sampled `F_{θφ}` over the
//! `(θ, φ)` sphere. The lattice route multiplies plaquette Berry phases on a
//! momentum torus and is integer by construction.
//!
//! Orientation: the QGT curvature `F^{θφ} = i(Q − Q†)` of the upper diamond
//! pair is `−½ sin θ` on block 1. The surface element is oriented with
//! [`SPHERE_ORIENTATION`] `= −1` so block 1 has `𝒞₊ = +1`.

mod lattice;
mod sphere;

pub use lattice::{chern_lattice, LATTICE_MIN_GAP};
pub use sphere::{
    analytic_block_chern, chern_from_metric, chern_from_samples, chern_integral, detg_curvature_residual,
    oriented_curvature, MetricSample, SphereGrid, MIN_PHI_SAMPLES, MIN_THETA_SAMPLES, NEGATIVE_DET_LIMIT,
    SPHERE_ORIENTATION,
};

/// How a Chern number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChernMethod {
    /// Quadrature of the sampled curvature.
    CurvatureIntegral,
    /// Plaquette Berry-phase product; the value is an exact integer.
    LatticePlaquette,
    /// `|F| = 2√det g` with the sign copied from a measured curvature.
    MetricSignBorrowed,
}

impl ChernMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ChernMethod::CurvatureIntegral => "curvature-integral",
            ChernMethod::LatticePlaquette => "lattice-plaquette",
            ChernMethod::MetricSignBorrowed => "metric-sign-borrowed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernResult {
    pub value: f64,
    pub method: ChernMethod,
    /// Samples along `θ` (or `kx`).
    pub grid_theta: usize,
    /// Samples along `φ` (or `ky`).
    pub grid_phi: usize,
    /// 1-based block label, when known.
    pub block: Option<usize>,
}

impl ChernResult {
    pub fn with_block(self, block: usize) -> Self {
        Self { block: Some(block), ..self }
    }
}

/// `(𝒞_scn, 𝒞₊ + 𝒞₋)` with `𝒞_scn = (𝒞₊ − 𝒞₋)/2`.
pub fn spin_chern(c_plus: f64, c_minus: f64) -> (f64, f64) {
    ((c_plus - c_minus) / 2.0, c_plus + c_minus)
}
