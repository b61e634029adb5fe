use rayon::prelude::*;
use std::f64::consts::TAU;

use super::{ChernMethod, ChernResult};
use crate::error::{Error, Result};
use crate::models::{ParamHamiltonian, ParamPoint};
use crate::numkit::{default_deg_tol, det, eigh, ComplexMat, C64};

/// Smallest half-gap between the occupied and empty bands on the grid.
pub const LATTICE_MIN_GAP: f64 = 1e-6;

/// Link overlaps smaller than this mean the grid is too coarse.
const MIN_LINK_OVERLAP: f64 = 1e-10;

/// Accepted distance of the summed plaquette phases from an integer.
const INTEGER_TOLERANCE: f64 = 1e-6;

/// Chern number of the lower half of the bands on the `n_grid × n_grid`
/// torus `[0, 2π)²` spanned by the model's two parameters.
///
/// Each link is `det ⟨u_a(k)|u_b(k + δ)⟩` over the occupied bands,
/// normalized to a phase. The plaquette phase is the principal argument of
/// the product around `k → k + δ₁ → k + δ₁ + δ₂ → k + δ₂`, and the phases
/// sum to `2π 𝒞` exactly.
pub fn chern_lattice(model: &dyn ParamHamiltonian, n_grid: usize) -> Result<ChernResult> {
    let names = model.param_names();
    if names.len() != 2 {
        return Err(Error::ConfigInvalid(format!("lattice Chern needs two parameters, model has {}", names.len())));
    }
    if n_grid < 2 {
        return Err(Error::ConfigInvalid(format!("lattice grid {n_grid} is too small")));
    }
    let dim = model.dim();
    let occupied = dim / 2;
    let k = |i: usize| TAU * (i % n_grid) as f64 / n_grid as f64;

    let frames = (0..n_grid * n_grid)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n_grid, idx % n_grid);
            let pt = ParamPoint::from_pairs([(names[0], k(i)), (names[1], k(j))]);
            let h = model.eval(&pt)?;
            let sd = eigh(&h, default_deg_tol(&h))?;
            let half_gap = 0.5 * (sd.values[occupied] - sd.values[occupied - 1]);
            let columns: Vec<Vec<C64>> = (0..occupied).map(|b| sd.vectors.column(b)).collect();
            Ok((half_gap, columns))
        })
        .collect::<Result<Vec<_>>>()?;

    let min_gap = frames.iter().map(|(g, _)| *g).fold(f64::INFINITY, f64::min);
    if min_gap <= LATTICE_MIN_GAP {
        return Err(Error::GaplessModel(min_gap));
    }

    let at = |i: usize, j: usize| &frames[(i % n_grid) * n_grid + j % n_grid].1;
    let link = |a: &[Vec<C64>], b: &[Vec<C64>]| -> Result<C64> {
        let mut m = ComplexMat::zeros(occupied, occupied);
        for (r, u) in a.iter().enumerate() {
            for (c, v) in b.iter().enumerate() {
                m[(r, c)] = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
            }
        }
        let d = det(&m);
        if d.norm() < MIN_LINK_OVERLAP {
            return Err(Error::NumericalFailure(format!("link overlap {:e} on a {n_grid}² grid", d.norm())));
        }
        Ok(d / d.norm())
    };

    let flux: f64 = (0..n_grid * n_grid)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n_grid, idx % n_grid);
            let u1 = link(at(i, j), at(i + 1, j))?;
            let u2 = link(at(i + 1, j), at(i + 1, j + 1))?;
            let u3 = link(at(i, j + 1), at(i + 1, j + 1))?;
            let u4 = link(at(i, j), at(i, j + 1))?;
            Ok((u1 * u2 * u3.conj() * u4.conj()).arg())
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();

    let raw = flux / TAU;
    let value = raw.round();
    if (raw - value).abs() > INTEGER_TOLERANCE {
        return Err(Error::NumericalFailure(format!("plaquette sum {raw} is not an integer")));
    }
    Ok(ChernResult {
        value: value + 0.0,
        method: ChernMethod::LatticePlaquette,
        grid_theta: n_grid,
        grid_phi: n_grid,
        block: None,
    })
}
