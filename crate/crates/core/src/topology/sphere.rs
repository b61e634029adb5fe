use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use super::{ChernMethod, ChernResult};
use crate::error::{Error, Result};
use crate::models::{DiamondModel, DIAMOND_PAIRING};
use crate::qgt::{qgt_sum_over_states, Band, QgtOptions};

pub const MIN_THETA_SAMPLES: usize = 11;
pub const MIN_PHI_SAMPLES: usize = 4;

/// Sign mapping the QGT curvature `F^{θφ}` onto the oriented surface element.
pub const SPHERE_ORIENTATION: f64 = -1.0;

/// `det g` below this is rejected rather than clamped to zero.
pub const NEGATIVE_DET_LIMIT: f64 = -1e-10;

/// Curvature on the oriented sphere chart.
pub fn oriented_curvature(f_theta_phi: f64) -> f64 {
    SPHERE_ORIENTATION * f_theta_phi
}

/// `θ_i = iπ/(n_θ − 1)` including both poles, `φ_j = 2πj/n_φ` periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < MIN_THETA_SAMPLES || n_phi < MIN_PHI_SAMPLES {
            return Err(Error::ConfigInvalid(format!(
                "sphere grid {n_theta}×{n_phi} below {MIN_THETA_SAMPLES}×{MIN_PHI_SAMPLES}"
            )));
        }
        Ok(Self { n_theta, n_phi })
    }

    pub fn theta(&self, i: usize) -> f64 {
        PI * i as f64 / (self.n_theta - 1) as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_phi as f64
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row-major order, `θ` slowest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.n_theta)
            .flat_map(|i| (0..self.n_phi).map(move |j| (i, j)))
            .map(|(i, j)| (self.theta(i), self.phi(j)))
            .collect()
    }

    /// `(1/2π) ∫ f dθ dφ` from row-major samples.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.len() {
            return Err(Error::InvalidTrace(format!(
                "{} samples for a {}×{} grid",
                samples.len(),
                self.n_theta,
                self.n_phi
            )));
        }
        for (k, v) in samples.iter().enumerate() {
            if !v.is_finite() {
                let (i, j) = (k / self.n_phi, k % self.n_phi);
                return Err(Error::InvalidSample(self.theta(i), self.phi(j)));
            }
        }
        let (h_theta, h_phi) = (PI / (self.n_theta - 1) as f64, TAU / self.n_phi as f64);
        let mut total = 0.0;
        for i in 0..self.n_theta {
            let w = if i == 0 || i == self.n_theta - 1 { 0.5 } else { 1.0 };
            let row: f64 = samples[i * self.n_phi..(i + 1) * self.n_phi].iter().sum();
            total += w * row;
        }
        Ok(total * h_theta * h_phi / TAU)
    }
}

/// Curvature-integral Chern number from row-major samples of the oriented `F_{θφ}`.
pub fn chern_from_samples(grid: SphereGrid, samples: &[f64]) -> Result<ChernResult> {
    Ok(ChernResult {
        value: grid.integrate(samples)?,
        method: ChernMethod::CurvatureIntegral,
        grid_theta: grid.n_theta,
        grid_phi: grid.n_phi,
        block: None,
    })
}

/// `(1/2π) ∫₀^π dθ ∫₀^{2π} dφ F(θ, φ)` by the trapezoid rule.
///
/// The sampler returns the curvature already on the oriented chart.
pub fn chern_integral<F>(sampler: F, n_theta: usize, n_phi: usize) -> Result<ChernResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let grid = SphereGrid::new(n_theta, n_phi)?;
    let samples: Vec<f64> = grid.points().into_par_iter().map(|(t, p)| sampler(t, p)).collect();
    chern_from_samples(grid, &samples)
}

/// Curvature-integral Chern number of diamond block `block` (1 or 2) from
/// the closed-form QGT of the upper degenerate pair.
pub fn analytic_block_chern(model: &DiamondModel, block: usize, n_theta: usize, n_phi: usize) -> Result<ChernResult> {
    if !(1..=2).contains(&block) {
        return Err(Error::ConfigInvalid(format!("block must be 1 or 2, got {block}")));
    }
    let grid = SphereGrid::new(n_theta, n_phi)?;
    let opts = QgtOptions::block_basis(Band::Highest, &DIAMOND_PAIRING);
    let samples = grid
        .points()
        .into_par_iter()
        .map(|(t, p)| {
            let q = qgt_sum_over_states(model, &DiamondModel::point(t, p), "theta", "phi", &opts)?;
            Ok(oriented_curvature(q.f[(block - 1, block - 1)].re))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(chern_from_samples(grid, &samples)?.with_block(block))
}

/// Diagonal metric entries and curvature of one state at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub g_tt: f64,
    pub g_pp: f64,
    pub g_tp: f64,
    pub f_tp: f64,
}

impl MetricSample {
    pub fn det(&self) -> f64 {
        self.g_tt * self.g_pp - self.g_tp * self.g_tp
    }

    /// `√det g`, with tiny negative determinants read as zero.
    pub fn sqrt_det(&self) -> Result<f64> {
        let d = self.det();
        if d < NEGATIVE_DET_LIMIT || !d.is_finite() {
            return Err(Error::MetricInconsistent(d));
        }
        Ok(d.max(0.0).sqrt())
    }
}

/// `max |√det g − ½|F||` over the samples.
pub fn detg_curvature_residual(samples: &[MetricSample]) -> Result<f64> {
    samples.iter().try_fold(0.0f64, |acc, s| Ok(acc.max((s.sqrt_det()? - 0.5 * s.f_tp.abs()).abs())))
}

/// Chern number from the metric alone: `|F| = 2√det g` on every sample,
/// signed by `sign_reference`, the curvature measured at `θ = π/2`.
///
/// The metric fixes only the magnitude; the orientation is borrowed.
pub fn chern_from_metric(grid: SphereGrid, metric: &[MetricSample], sign_reference: f64) -> Result<ChernResult> {
    if sign_reference == 0.0 || !sign_reference.is_finite() {
        return Err(Error::InvalidSample(0.5 * PI, 0.0));
    }
    let sign = sign_reference.signum();
    let samples = metric.iter().map(|s| Ok(sign * 2.0 * s.sqrt_det()?)).collect::<Result<Vec<f64>>>()?;
    Ok(ChernResult { method: ChernMethod::MetricSignBorrowed, ..chern_from_samples(grid, &samples)? })
}
