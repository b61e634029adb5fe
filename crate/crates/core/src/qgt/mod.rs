//! Non-Abelian quantum geometric tensor of a degenerate level group.
//!
//! For a group of degenerate eigenstates `|ψᵢ⟩` with projector `P`,
//!
//! ```text
//! Q^{μν}_{ij} = ⟨∂_μ ψᵢ| (1 − P) |∂_ν ψⱼ⟩
//!             = Σ_{m ∉ group} ⟨ψᵢ|∂_μH|ψ_m⟩⟨ψ_m|∂_νH|ψⱼ⟩ / (E − E_m)²
//! ```
//!
//! The metric is `g = (Q + Q†)/2` and the curvature `F = i(Q − Q†)`.
//! The second line is the primary evaluation route; a direct finite
//! difference of gauge-aligned eigenvectors serves as an independent check.
//!
//! Matrix elements are covariant under a change of basis inside the group,
//! so every [`QgtBlock`] carries the basis it was computed in.

use crate::error::{Error, Result};
use crate::models::{partial, Pairing, ParamHamiltonian, ParamPoint};
use crate::numkit::{default_deg_tol, eigh, fix_phase, ComplexMat, SpectralDecomp, I};

/// Which degenerate group of the spectrum to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Lowest,
    Highest,
    /// Group index counted from the bottom of the spectrum.
    Group(usize),
}

/// How the basis inside the selected group is fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupBasis {
    /// Eigenvectors as returned by [`eigh`].
    Eigh,
    /// Eigenvectors of an observable that commutes with the Hamiltonian,
    /// restricted to the group, in ascending order of its eigenvalues.
    Diagonalizing(ComplexMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QgtOptions {
    pub band: Band,
    /// Degeneracy tolerance; `None` means `1e-6 · ‖H‖`.
    pub deg_tol: Option<f64>,
    pub basis: GroupBasis,
}

impl Default for QgtOptions {
    fn default() -> Self {
        Self { band: Band::Lowest, deg_tol: None, basis: GroupBasis::Eigh }
    }
}

impl QgtOptions {
    /// Group basis labelled by block: state `j` lives in block `j` of `pairing`.
    pub fn block_basis(band: Band, pairing: &Pairing) -> Self {
        Self { band, deg_tol: None, basis: GroupBasis::Diagonalizing(block_observable(pairing)) }
    }
}

/// Diagonal operator equal to `1` on the first pair and `2` on the second.
pub fn block_observable(pairing: &Pairing) -> ComplexMat {
    let mut diag = [0.0; 4];
    for (b, pair) in pairing.0.iter().enumerate() {
        for &i in pair {
            diag[i] = (b + 1) as f64;
        }
    }
    ComplexMat::from_diag(&diag)
}

/// One parameter pair's tensor over the selected group.
#[derive(Debug, Clone)]
pub struct QgtBlock {
    pub mu: String,
    pub nu: String,
    pub q: ComplexMat,
    pub g: ComplexMat,
    pub f: ComplexMat,
    /// Group basis, one column per state.
    pub basis: ComplexMat,
    pub energy: f64,
}

impl QgtBlock {
    fn new(mu: &str, nu: &str, q: ComplexMat, frame: &GroupFrame) -> Self {
        let (g, f) = metric_and_curvature(&q);
        Self { mu: mu.to_string(), nu: nu.to_string(), q, g, f, basis: frame.vectors.clone(), energy: frame.energy }
    }

    pub fn degeneracy(&self) -> usize {
        self.q.rows()
    }
}

/// `g = (Q + Q†)/2`, `F = i(Q − Q†)`.
pub fn metric_and_curvature(q: &ComplexMat) -> (ComplexMat, ComplexMat) {
    let qd = q.adjoint();
    ((q + &qd).scale_real(0.5), (q - &qd).scale(I))
}

/// Eigen-data of the selected group at one parameter point.
#[derive(Debug, Clone)]
pub struct GroupFrame {
    pub decomp: SpectralDecomp,
    pub group: usize,
    pub vectors: ComplexMat,
    pub energy: f64,
}

impl GroupFrame {
    pub fn at(h: &ComplexMat, opts: &QgtOptions) -> Result<Self> {
        let deg_tol = opts.deg_tol.unwrap_or_else(|| default_deg_tol(h));
        let decomp = eigh(h, deg_tol)?;
        let n_groups = decomp.groups.len();
        let group = match opts.band {
            Band::Lowest => 0,
            Band::Highest => n_groups - 1,
            Band::Group(k) if k < n_groups => k,
            Band::Group(k) => {
                return Err(Error::InvalidMatrix(format!("group {k} requested, spectrum has {n_groups}")))
            }
        };
        if n_groups < 2 {
            return Err(Error::DegeneracyCollision { gap: 0.0, required: 1e3 * deg_tol });
        }
        let energy = decomp.group_energy(group);
        let gap = decomp
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| !decomp.groups[group].contains(i))
            .map(|(_, e)| (e - energy).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < 1e3 * deg_tol {
            return Err(Error::DegeneracyCollision { gap, required: 1e3 * deg_tol });
        }
        let mut vectors = decomp.group_vectors(group);
        if let GroupBasis::Diagonalizing(obs) = &opts.basis {
            let restricted = &(&vectors.adjoint() * obs) * &vectors;
            let inner = eigh(&restricted.hermitian_part(), 0.0)?;
            vectors = &vectors * &inner.vectors;
        }
        for j in 0..vectors.cols() {
            let mut col = vectors.column(j);
            fix_phase(&mut col);
            vectors.set_column(j, &col);
        }
        Ok(Self { decomp, group, vectors, energy })
    }

    pub fn degeneracy(&self) -> usize {
        self.vectors.cols()
    }
}

/// Tensor by the sum over states outside the selected group.
pub fn qgt_sum_over_states(
    model: &dyn ParamHamiltonian,
    pt: &ParamPoint,
    mu: &str,
    nu: &str,
    opts: &QgtOptions,
) -> Result<QgtBlock> {
    let frame = GroupFrame::at(&model.eval(pt)?, opts)?;
    let dmu = partial(model, pt, mu)?;
    let dnu = if mu == nu { dmu.clone() } else { partial(model, pt, nu)? };
    Ok(QgtBlock::new(mu, nu, sum_over_states(&frame, &dmu, &dnu), &frame))
}

/// All four ordered pairs over `(mu, nu)` share one eigendecomposition.
pub fn sum_over_states(frame: &GroupFrame, dmu: &ComplexMat, dnu: &ComplexMat) -> ComplexMat {
    let all = &frame.decomp.vectors;
    let left = &(&frame.vectors.adjoint() * dmu) * all; // n × d
    let right = &(&all.adjoint() * dnu) * &frame.vectors; // d × n
    let n = frame.degeneracy();
    let members = &frame.decomp.groups[frame.group];
    let mut q = ComplexMat::zeros(n, n);
    for (m, &em) in frame.decomp.values.iter().enumerate() {
        if members.contains(&m) {
            continue;
        }
        let w = 1.0 / (frame.energy - em).powi(2);
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] += left[(i, m)] * right[(m, j)] * w;
            }
        }
    }
    q
}

/// Default step of the finite-difference oracle.
pub const FD_QGT_STEP: f64 = 1e-4;

/// Tensor from central differences of eigenvectors.
///
/// The group basis at each displaced point is rotated onto the basis at
/// `pt` by the unitary polar factor of their overlap, which realizes
/// parallel transport to first order; the projector `1 − P` then removes
/// what remains of the gauge freedom.
pub fn qgt_finite_difference(
    model: &dyn ParamHamiltonian,
    pt: &ParamPoint,
    mu: &str,
    nu: &str,
    opts: &QgtOptions,
    step: f64,
) -> Result<QgtBlock> {
    for name in [mu, nu] {
        if !model.has_param(name) {
            return Err(Error::UnknownParam(name.to_string()));
        }
    }
    let frame = GroupFrame::at(&model.eval(pt)?, opts)?;
    let dmu = transported_derivative(model, pt, mu, &frame, opts, step)?;
    let dnu = if mu == nu { dmu.clone() } else { transported_derivative(model, pt, nu, &frame, opts, step)? };
    let v = &frame.vectors;
    let projector = &ComplexMat::identity(v.rows()) - &(v * &v.adjoint());
    let q = &(&dmu.adjoint() * &projector) * &dnu;
    Ok(QgtBlock::new(mu, nu, q, &frame))
}

fn transported_derivative(
    model: &dyn ParamHamiltonian,
    pt: &ParamPoint,
    mu: &str,
    frame: &GroupFrame,
    opts: &QgtOptions,
    step: f64,
) -> Result<ComplexMat> {
    let side = |sign: f64| -> Result<ComplexMat> {
        let h = model.eval(&pt.shifted(mu, sign * step)?)?;
        let other = GroupFrame::at(&h, opts)?;
        if other.degeneracy() != frame.degeneracy() {
            return Err(Error::DegeneracyCollision { gap: 0.0, required: step });
        }
        align(&frame.vectors, &other.vectors)
    };
    let plus = side(1.0)?;
    let minus = side(-1.0)?;
    Ok((&plus - &minus).scale_real(0.5 / step))
}

/// Rotates the columns of `u` within their span to maximize overlap with `reference`.
fn align(reference: &ComplexMat, u: &ComplexMat) -> Result<ComplexMat> {
    let overlap = &reference.adjoint() * u; // O = V₀† U
    let gram = &overlap.adjoint() * &overlap;
    let sd = eigh(&gram.hermitian_part(), 0.0)?;
    let min_singular = sd.values[0].max(0.0).sqrt();
    if min_singular < 0.9 {
        return Err(Error::GaugeAlignmentFailure(min_singular));
    }
    let n = gram.rows();
    let mut inv_sqrt = sd.vectors.clone();
    for j in 0..n {
        let s = 1.0 / sd.values[j].sqrt();
        for i in 0..n {
            inv_sqrt[(i, j)] *= s;
        }
    }
    let inv_sqrt = &inv_sqrt * &sd.vectors.adjoint();
    let w = &overlap * &inv_sqrt; // polar factor of O
    Ok(u * &w.adjoint())
}
