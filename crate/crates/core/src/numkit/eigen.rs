use crate::error::{Error, Result};

use super::matrix::{ComplexMat, C64, ZERO};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues ascend; eigenvectors are the columns of `vectors`, each with
/// its largest-magnitude component made real and positive. `groups` holds
/// runs of consecutive indices whose eigenvalues lie within the degeneracy
/// tolerance of their neighbour.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub values: Vec<f64>,
    pub vectors: ComplexMat,
    pub groups: Vec<Vec<usize>>,
    pub deg_tol: f64,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Index of the group containing eigenvalue `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.groups.iter().position(|g| g.contains(&i)).expect("index out of range")
    }

    /// Columns of one degenerate group, as a `dim × n` matrix.
    pub fn group_vectors(&self, group: usize) -> ComplexMat {
        let cols: Vec<usize> = self.groups[group].clone();
        let rows: Vec<usize> = (0..self.dim()).collect();
        self.vectors.select(&rows, &cols)
    }

    /// Mean eigenvalue of a group.
    pub fn group_energy(&self, group: usize) -> f64 {
        let g = &self.groups[group];
        g.iter().map(|&i| self.values[i]).sum::<f64>() / g.len() as f64
    }

    /// `V · diag(E) · V†`.
    pub fn reconstruct(&self) -> ComplexMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        &scaled * &self.vectors.adjoint()
    }
}

/// Default degeneracy tolerance: `1e-6 · ‖H‖_F`.
pub fn default_deg_tol(h: &ComplexMat) -> f64 {
    1e-6 * h.frobenius()
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized first. Disconnected blocks of the sparsity
/// pattern are diagonalized independently.
pub fn eigh(h: &ComplexMat, deg_tol: f64) -> Result<SpectralDecomp> {
    if !h.is_square() {
        return Err(Error::InvalidMatrix(format!("not square: {}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let scale = h.frobenius();
    let herm = h.hermiticity_error();
    if herm > 1e-9 * scale.max(f64::MIN_POSITIVE) && herm > 0.0 {
        return Err(Error::InvalidMatrix(format!("not Hermitian: ‖H − H†‖ = {herm:e}")));
    }
    let n = h.dim();
    let sym = h.hermitian_part();

    let mut values = vec![0.0; n];
    let mut vectors = ComplexMat::zeros(n, n);
    for comp in connected_components(&sym) {
        let sub = sym.select(&comp, &comp);
        let (vals, vecs) = jacobi(sub)?;
        for (a, &i) in comp.iter().enumerate() {
            values[i] = vals[a];
            for (b, &j) in comp.iter().enumerate() {
                vectors[(j, i)] = vecs[(b, a)];
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = ComplexMat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        let mut col = vectors.column(old);
        fix_phase(&mut col);
        sorted_vectors.set_column(new, &col);
    }

    let groups = group_indices(&sorted_values, deg_tol);
    Ok(SpectralDecomp { values: sorted_values, vectors: sorted_vectors, groups, deg_tol })
}

/// `exp(−i H dt)` through the eigendecomposition of `H`.
pub fn propagator(h: &ComplexMat, dt: f64) -> Result<ComplexMat> {
    if !dt.is_finite() {
        return Err(Error::NumericalFailure(format!("non-finite time step {dt}")));
    }
    let sd = eigh(h, 0.0)?;
    let n = sd.dim();
    let mut scaled = sd.vectors.clone();
    for j in 0..n {
        let phase = C64::from_polar(1.0, -sd.values[j] * dt);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(&scaled * &sd.vectors.adjoint())
}

/// Makes the largest-magnitude component of `v` real and positive.
/// Ties within a relative 1e-9 go to the lowest index.
pub fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let k = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
    let phase = v[k].conj() / v[k].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn group_indices(values: &[f64], deg_tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &e) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (e - values[*g.last().unwrap()]).abs() <= deg_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn connected_components(h: &ComplexMat) -> Vec<Vec<usize>> {
    let n = h.dim();
    let mut label = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if label[j] == usize::MAX && h[(i, j)] != ZERO {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

fn off_diagonal_norm(a: &ComplexMat) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: ComplexMat) -> Result<(Vec<f64>, ComplexMat)> {
    let n = a.dim();
    let mut v = ComplexMat::identity(n);
    if n == 1 {
        return Ok((vec![a[(0, 0)].re], v));
    }
    let scale = a.frobenius();
    let target = f64::EPSILON * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b == 0.0 || b < 1e-3 * f64::EPSILON * scale {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, b);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > 1e3 * target {
        return Err(Error::NumericalFailure(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
    }
    Ok(((0..n).map(|i| a[(i, i)].re).collect(), v))
}

/// Annihilates `a[(p, q)]` with a unitary `J = diag(1, e^{−iα}) · R(θ)` acting
/// on the `(p, q)` plane, where `α = arg a_pq`.
fn rotate(a: &mut ComplexMat, v: &mut ComplexMat, p: usize, q: usize, apq: C64, b: f64) {
    let n = a.dim();
    let e = apq / b; // e^{iα}
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -e.conj() * s;
    let jqq = e.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}
